//! Acceptance criteria 1–11. Each criterion runs the library reproduction
//! and an independent oracle written here, then prints one PASS/FAIL line.
//!
//! Two criteria are known not to be attainable as stated: the quoted disk
//! spot value disagrees with its own closed form in the sixth digit, and the
//! literal symmetric identity omits the anti-contact term. Both print FAIL;
//! the run only errors when a criterion fails for any other reason.

use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use coexist_core::barrier::{
    barrier_disk, barrier_grid_minimax, barrier_grid_minimax_dijkstra, constrained_barrier_square, decompose_droplets,
    decompose_symmetric, evaluate_evolution, exponent_xlambda, kappa, Candidate, EvolutionPath, Family, GridProfile,
    PhaseProfile, ReducedTension, SurfaceTensionFn,
};
use coexist_core::cluster::{edge_probability, es_joint_exact};
use coexist_core::dynamics::{
    estimate_autocorrelation, simulate, simulate_coupled, AutocorrelationConfig, DynamicsSeed, RateModel, VarianceMethod,
};
use coexist_core::harness::{box_shapes, fuzzed_profiles, repro};
use coexist_core::model::{Boundary, CouplingField, LatticeBox, SpinConfig, Vertex};
use coexist_core::spectral::{verify_lemma_f1, ExactGenerator};
use coexist_core::stats::poisson_tv;
use coexist_core::tension::{DisconnectionCache, RateFunctionModel, RectSpec, Rectangle};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn rng(k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + k)
}

fn boxed(ranges: &[(i64, i64)]) -> Arc<LatticeBox> {
    Arc::new(LatticeBox::from_ranges(ranges).unwrap())
}

fn random_field(lattice: &Arc<LatticeBox>, g: &mut ChaCha8Rng) -> CouplingField {
    let values = (0..lattice.edges().len()).map(|_| g.gen::<f64>()).collect();
    CouplingField::from_values(lattice.clone(), values).unwrap()
}

// ---------------------------------------------------------------------------
// oracles

fn spin(bits: usize, v: Vertex) -> f64 {
    match v {
        Vertex::Site(i) if bits >> i & 1 == 0 => -1.0,
        _ => 1.0,
    }
}

/// Plus-boundary Gibbs law `∝ exp(β/2 Σ_e J_e σ_a σ_b)` by enumeration.
fn gibbs(field: &CouplingField, beta: f64) -> Vec<f64> {
    let l = field.lattice();
    let logw: Vec<f64> = (0..1usize << l.len())
        .map(|s| 0.5 * beta * l.edges().iter().zip(field.values()).map(|(e, j)| j * spin(s, e.a) * spin(s, e.b)).sum::<f64>())
        .collect();
    normalize(&logw)
}

fn normalize(logw: &[f64]) -> Vec<f64> {
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|x| (x - top).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn components(nodes: usize, edges: impl Iterator<Item = (usize, usize)>) -> (usize, Vec<usize>) {
    let mut parent: Vec<usize> = (0..nodes).collect();
    let mut k = nodes;
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            k -= 1;
        }
    }
    let roots = (0..nodes).map(|v| find(&mut parent, v)).collect();
    (k, roots)
}

/// Wired random-cluster law with `q = 2` on the closed edge set: every
/// exterior vertex is the single node `n`.
fn fk_wired(field: &CouplingField, beta: f64) -> Vec<f64> {
    let l = field.lattice();
    let n = l.len();
    let node = |v: Vertex| match v {
        Vertex::Site(i) => i,
        Vertex::Exterior(_) => n,
    };
    let p: Vec<f64> = field.values().iter().map(|j| 1.0 - (-beta * j).exp()).collect();
    let logw: Vec<f64> = (0..1usize << p.len())
        .map(|w| {
            let open = l.edges().iter().enumerate().filter(|(e, _)| w >> e & 1 == 1).map(|(_, e)| (node(e.a), node(e.b)));
            let (k, _) = components(n + 1, open);
            let mut lw = k as f64 * LN_2;
            for (e, pe) in p.iter().enumerate() {
                lw += if w >> e & 1 == 1 { pe.ln() } else { (1.0 - pe).ln() };
            }
            lw
        })
        .collect();
    normalize(&logw)
}

#[derive(Clone, Copy)]
enum Kind {
    HeatBath,
    Metropolis,
}

/// Dense generator with rates written through the Gibbs ratio
/// `r = μ(σ^x)/μ(σ)`: heat bath `r/(1+r)`, Metropolis `max(1, r)`.
fn generator(mu: &[f64], sites: usize, kind: Kind) -> DMatrix<f64> {
    let n = mu.len();
    let mut l = DMatrix::zeros(n, n);
    for s in 0..n {
        for x in 0..sites {
            let t = s ^ (1 << x);
            let r = mu[t] / mu[s];
            let c = match kind {
                Kind::HeatBath => r / (1.0 + r),
                Kind::Metropolis => r.max(1.0),
            };
            l[(s, t)] += c;
            l[(s, s)] -= c;
        }
    }
    l
}

/// Reversible semigroup via the symmetrized spectral decomposition.
struct Semigroup {
    vals: DVector<f64>,
    vecs: DMatrix<f64>,
    sq: Vec<f64>,
}

impl Semigroup {
    fn new(l: &DMatrix<f64>, mu: &[f64]) -> Self {
        let sq: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
        let n = mu.len();
        let s = DMatrix::from_fn(n, n, |i, j| {
            let a = sq[i] * l[(i, j)] / sq[j];
            let b = sq[j] * l[(j, i)] / sq[i];
            0.5 * (a + b)
        });
        let e = SymmetricEigen::new(s);
        Semigroup { vals: e.eigenvalues, vecs: e.eigenvectors, sq }
    }

    fn gap(&self) -> f64 {
        let mut v: Vec<f64> = self.vals.iter().map(|x| -x).collect();
        v.sort_by(f64::total_cmp);
        v[1]
    }

    fn apply(&self, f: &[f64], t: f64) -> Vec<f64> {
        let g = DVector::from_iterator(f.len(), f.iter().zip(&self.sq).map(|(a, b)| a * b));
        let c = self.vecs.transpose() * g;
        let c = DVector::from_iterator(c.len(), c.iter().zip(self.vals.iter()).map(|(a, v)| a * (v * t).exp()));
        let h = &self.vecs * c;
        h.iter().zip(&self.sq).map(|(a, b)| a / b).collect()
    }
}

fn mean(mu: &[f64], f: &[f64]) -> f64 {
    mu.iter().zip(f).map(|(m, x)| m * x).sum()
}

fn var(mu: &[f64], f: &[f64]) -> f64 {
    let m = mean(mu, f);
    mu.iter().zip(f).map(|(p, x)| p * (x - m).powi(2)).sum()
}

fn spin_fn(states: usize, i: usize) -> Vec<f64> {
    (0..states).map(|s| if s >> i & 1 == 1 { 1.0 } else { -1.0 }).collect()
}

/// Cell faces of a minus set on an `n × n` grid (outside is plus):
/// `(face id, minus side)` with the minus side `+1` for the cell of larger
/// index. Face ids: vertical `(i, j)` between columns `i−1` and `i`,
/// horizontal likewise offset by `(n+1)·n`.
fn faces(minus: &[bool], n: usize) -> Vec<(usize, i8)> {
    let at = |i: isize, j: isize| i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n && minus[i as usize + n * j as usize];
    let mut out = Vec::new();
    for j in 0..n as isize {
        for i in 0..=n as isize {
            let (a, b) = (at(i - 1, j), at(i, j));
            if a != b {
                out.push((i as usize + (n + 1) * j as usize, if b { 1 } else { -1 }));
            }
        }
    }
    for i in 0..n as isize {
        for j in 0..=n as isize {
            let (a, b) = (at(i, j - 1), at(i, j));
            if a != b {
                out.push(((n + 1) * n + j as usize + (n + 1) * i as usize, if b { 1 } else { -1 }));
            }
        }
    }
    out
}

/// `(F^r, F^{r,−}, anti-contact)` for `ℓ¹` tension (1 on axis faces) and
/// constant reduced tension `λ`.
fn face_energies(u: &[bool], u0: &[bool], n: usize, lambda: f64) -> (f64, f64, f64) {
    let h = 1.0 / n as f64;
    let f0 = faces(u0, n);
    let (mut reduced, mut signed, mut anti) = (0.0, 0.0, 0.0);
    for (f, side) in faces(u, n) {
        match f0.iter().find(|g| g.0 == f) {
            None => {
                reduced += h;
                signed += h;
            }
            Some(g) => {
                reduced += lambda * h;
                signed -= lambda * h;
                if g.1 != side {
                    anti += lambda * h;
                }
            }
        }
    }
    (reduced, signed, anti)
}

// ---------------------------------------------------------------------------
// criteria

fn c1() -> Outcome {
    let start = Instant::now();
    let lib = repro("1").unwrap();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (i, shape) in box_shapes(2, 4).into_iter().enumerate() {
        let ranges: Vec<(i64, i64)> = shape.iter().map(|&a| (0, a as i64 - 1)).collect();
        let l = boxed(&ranges);
        for k in 0..5 {
            let mut g = rng(100 * i as u64 + k);
            let field = random_field(&l, &mut g);
            let beta = 0.1 + 1.9 * g.gen::<f64>();
            let es = es_joint_exact(&field, beta).unwrap();
            for (a, b) in es.sigma_marginal().iter().zip(gibbs(&field, beta)) {
                worst = worst.max((a - b).abs());
            }
            for (a, b) in es.omega_marginal().iter().zip(fk_wired(&field, beta)) {
                worst = worst.max((a - b).abs());
            }
            cases += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (lib.pass && worst < 1e-12 && secs < 10.0, format!("{}; oracle: {cases} draws, max error {worst:.1e}, {secs:.1}s", lib.detail))
}

fn c2() -> Outcome {
    let lib = repro("2").unwrap();
    let mut worst: f64 = 0.0;
    for (i, shape) in box_shapes(2, 9).into_iter().enumerate() {
        let ranges: Vec<(i64, i64)> = shape.iter().map(|&a| (0, a as i64 - 1)).collect();
        let l = boxed(&ranges);
        let mut g = rng(200 + i as u64);
        let field = random_field(&l, &mut g);
        let beta = 0.1 + 1.9 * g.gen::<f64>();
        let mu = gibbs(&field, beta);
        for (model, kind) in [(RateModel::heat_bath(beta), Kind::HeatBath), (RateModel::metropolis(beta), Kind::Metropolis)] {
            let gen = ExactGenerator::new(&field, &model, Boundary::Plus).unwrap();
            let own = generator(&mu, l.len(), kind);
            for (a, b) in gen.mu().iter().zip(&mu) {
                worst = worst.max((a - b).abs());
            }
            let mut flux = vec![0.0; mu.len()];
            for s in 0..mu.len() {
                for x in 0..l.len() {
                    let t = s ^ (1 << x);
                    let c = gen.rate(s, x);
                    worst = worst.max((c - own[(s, t)]).abs() / own[(s, t)]);
                    worst = worst.max((mu[s] * c - mu[t] * gen.rate(t, x)).abs());
                    flux[t] += mu[s] * c;
                    flux[s] -= mu[s] * c;
                }
            }
            worst = worst.max(flux.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }
    (lib.pass && worst <= 1e-12, format!("{}; oracle max defect {worst:.1e}", lib.detail))
}

fn c3() -> Outcome {
    let lib = repro("3").unwrap();
    // two-state chain: heat-bath rates r/(1+r) and 1/(1+r) sum to one, and
    // at β = 0 the distance from a point mass is e^{−t}/2
    let tmix_oracle = 1.0 - LN_2;
    let single = boxed(&[(0, 0), (0, 0)]);
    let hot = CouplingField::uniform(single, 1.0).unwrap();
    let tmix = ExactGenerator::new(&hot, &RateModel::heat_bath(0.0), Boundary::Plus).unwrap().mixing_time().unwrap();
    let mut ok = (tmix - tmix_oracle).abs() < 1e-6;
    let mut worst_gap: f64 = 0.0;
    let mut probes = 0;
    for (i, ranges) in [[(0, 1), (0, 1)], [(-1, 1), (-1, 1)]].iter().enumerate() {
        let l = boxed(ranges);
        let mut g = rng(300 + i as u64);
        let field = random_field(&l, &mut g);
        let beta = 0.2 + g.gen::<f64>();
        let mu = gibbs(&field, beta);
        let sg = Semigroup::new(&generator(&mu, l.len(), Kind::HeatBath), &mu);
        let gen = ExactGenerator::new(&field, &RateModel::heat_bath(beta), Boundary::Plus).unwrap();
        worst_gap = worst_gap.max((gen.spectral_gap().unwrap().gap - sg.gap()).abs());
        let fs = [spin_fn(mu.len(), l.origin().unwrap()), (0..mu.len()).map(|_| g.gen::<f64>() - 0.5).collect()];
        for f in &fs {
            for t in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0] {
                probes += 1;
                ok &= var(&mu, &sg.apply(f, t)) <= (-2.0 * sg.gap() * t).exp() * var(&mu, f) * (1.0 + 1e-10) + 1e-15;
            }
        }
    }
    ok &= worst_gap < 1e-9;
    (lib.pass && ok, format!("{}; oracle: tmix {tmix:.8} vs 1−ln2, gap |Δ| {worst_gap:.1e}, {probes} decay probes", lib.detail))
}

fn c4() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut agree: f64 = 0.0;
    for k in 0..50u64 {
        let l = if k % 2 == 0 { boxed(&[(0, 1), (0, 1)]) } else { boxed(&[(-1, 1), (-1, 1)]) };
        let mut g = rng(400 + k);
        let field = random_field(&l, &mut g);
        let beta = 0.1 + 1.9 * g.gen::<f64>();
        let t = 3.0 * g.gen::<f64>();
        let mu = gibbs(&field, beta);
        let sg = Semigroup::new(&generator(&mu, l.len(), Kind::HeatBath), &mu);
        let pi0 = spin_fn(mu.len(), l.origin().unwrap());
        let ft = sg.apply(&pi0, t);
        let slack = ft[mu.len() - 1] - mean(&mu, &pi0) - 0.5 * var(&mu, &ft);
        worst = worst.min(slack);
        let lib = verify_lemma_f1(&field, &RateModel::heat_bath(beta), t).unwrap();
        let c = lib.checks.iter().find(|c| c.name == "half-variance").unwrap();
        agree = agree.max((c.slack - slack).abs());
    }
    let lib = repro("4").unwrap();
    (lib.pass && worst >= -1e-10 && agree < 1e-9, format!("{}; oracle smallest slack {worst:.3e}, |Δ| vs library {agree:.1e}", lib.detail))
}

fn c5() -> Outcome {
    let lib = repro("5").unwrap();
    // sup over the chord half-angle θ of 2r(sin θ − λθ), by golden section
    let sweep = |r: f64, lambda: f64| {
        let f = |th: f64| 2.0 * r * (th.sin() - lambda * th);
        let (mut a, mut b) = (0.0, PI);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let (c, d) = (b - phi * (b - a), a + phi * (b - a));
            if f(c) > f(d) {
                b = d
            } else {
                a = c
            }
        }
        f(0.5 * (a + b))
    };
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        for j in 0..20 {
            let r = 0.02 + 0.46 * i as f64 / 19.0;
            let lambda = 0.02 + 0.96 * j as f64 / 19.0;
            let family = Family::ChordSweep { center: [0.5, 0.5], radius: r };
            let u0 = family.start();
            let v = evaluate_evolution(
                &EvolutionPath::Continuous { family },
                &u0,
                &ReducedTension::constant(lambda),
                &SurfaceTensionFn::isotropic(1.0),
            )
            .unwrap();
            worst = worst.max((v.k_contribution - sweep(r, lambda)).abs());
        }
    }
    let spot = sweep(0.25, 0.5);
    let lib_spot = barrier_disk(0.25, 0.5).unwrap();
    let consistent = worst < 1e-9 && (spot - lib_spot).abs() < 1e-9;
    assert!(consistent, "chord sweep disagrees with the oracle: {worst:.2e}, {spot} vs {lib_spot}");
    // the quoted 0.171239 is off by 2.6e-5 from the closed form it names
    let quoted_ok = (spot - 0.171239).abs() <= 1e-6;
    (lib.pass && quoted_ok, format!("{}; oracle sweep |Δ| {worst:.1e}, oracle spot {spot:.7}", lib.detail))
}

fn c6() -> Outcome {
    let start = Instant::now();
    let lib = repro("6").unwrap();
    let n = 4;
    let lambda = 0.5;
    let mask = |s: usize| (0..16).map(|c| s >> c & 1 == 1).collect::<Vec<bool>>();
    let u0: usize = [(1, 1), (2, 1), (1, 2), (2, 2)].iter().map(|(i, j)| 1 << (i + n * j)).sum();
    let m0 = mask(u0);
    let energy: Vec<f64> = (0..1usize << 16).map(|s| face_energies(&mask(s), &m0, n, lambda).0).collect();
    let mut order: Vec<usize> = (0..energy.len()).collect();
    order.sort_by(|&a, &b| energy[a].total_cmp(&energy[b]));
    let mut parent: Vec<usize> = (0..energy.len()).collect();
    let mut active = vec![false; energy.len()];
    let mut brute = f64::NAN;
    for &s in &order {
        active[s] = true;
        for c in 0..16 {
            let t = s ^ (1 << c);
            if active[t] {
                let (a, b) = (find(&mut parent, s), find(&mut parent, t));
                parent[a] = b;
            }
        }
        if active[u0] && active[0] && find(&mut parent, u0) == find(&mut parent, 0) {
            brute = energy[s] - energy[u0];
            break;
        }
    }
    let g0 = PhaseProfile::Grid(GridProfile::block(4, 0, 1, 1, 2).unwrap());
    let (tr, tq) = (ReducedTension::constant(lambda), SurfaceTensionFn::L1);
    let k = barrier_grid_minimax(&g0, &tr, &tq, 1).unwrap().k_hat;
    let d = barrier_grid_minimax_dijkstra(&g0, &tr, &tq, 1).unwrap().k_hat;
    let secs = start.elapsed().as_secs_f64();
    let pass = lib.pass && k == 0.25 && d == 0.25 && (brute - 0.25).abs() < 1e-12 && secs < 60.0;
    (pass, format!("{}; oracle bottleneck over 2^16 profiles {brute}, {secs:.1}s", lib.detail))
}

fn c7() -> Outcome {
    let lib = repro("7").unwrap();
    let lambda = 0.5;
    let f1 = |m: f64| 1.0 + (2.0 - m) * lambda;
    let f2 = |m: f64| 4.0 * lambda + 2.0 * (1.0 - lambda) * ((1.0 + m) / 2.0).sqrt();
    // brute maximum of min(F¹, F²) on a fine grid
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
    for k in 0..=2_000_000 {
        let m = -1.0 + 2.0 * k as f64 / 2e6;
        let v = f1(m).min(f2(m));
        if v > best {
            (best, arg) = (v, m);
        }
    }
    let c = constrained_barrier_square(lambda).unwrap();
    let pass = lib.pass && (c.value - best).abs() < 1e-6 && (c.m0 - arg).abs() < 1e-5 && (1.0 + 3.0 * lambda) - best > 0.13;
    (pass, format!("{}; oracle max {best:.6} at m {arg:.6}", lib.detail))
}

/// `Φ(D_R)` under the wired measure, enumerated from the rectangle graph.
fn disconnection(rect: &Rectangle, p: &[f64]) -> f64 {
    let graph = &rect.graph;
    let nv = graph.num_vertices();
    let wired: Vec<usize> = (0..nv).filter(|&v| graph.is_boundary(v)).collect();
    let (mut z, mut zd) = (0.0, 0.0);
    let mut logs = Vec::with_capacity(1 << p.len());
    for w in 0..1usize << p.len() {
        let open = || graph.edges().iter().enumerate().filter(move |(e, _)| w >> e & 1 == 1).map(|(_, &ab)| ab);
        // wire the boundary through an extra node
        let (k, _) = components(nv + 1, open().chain(wired.iter().map(|&v| (v, nv))));
        let (_, roots) = components(nv, open());
        let joined = rect.upper.iter().any(|&a| rect.lower.iter().any(|&b| roots[a] == roots[b]));
        let mut lw = k as f64 * LN_2;
        for (e, pe) in p.iter().enumerate() {
            lw += if w >> e & 1 == 1 { pe.ln() } else { (1.0 - pe).ln() };
        }
        logs.push((lw, !joined));
    }
    let top = logs.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
    for (lw, d) in logs {
        let x = (lw - top).exp();
        z += x;
        if d {
            zd += x;
        }
    }
    zd / z
}

fn c8() -> Outcome {
    let lib = repro("8").unwrap();
    let beta = 1.0;
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    let mut rects = 0;
    for axis in 0..2 {
        for (l, h) in [(2.0, 1.0), (3.0, 1.0), (2.0, 1.5), (3.0, 1.5)] {
            let rect = Rectangle::new(RectSpec::new(vec![0.0, 0.0], l, h, axis)).unwrap();
            if rect.num_edges() == 0 || rect.num_edges() > 16 {
                continue;
            }
            rects += 1;
            let cache = DisconnectionCache::new(&rect).unwrap();
            let mut g = rng(800 + rects);
            let j: Vec<f64> = (0..rect.num_edges()).map(|_| g.gen()).collect();
            let p = |j: &[f64]| j.iter().map(|&x| 1.0 - (-beta * x).exp()).collect::<Vec<f64>>();
            let phi = disconnection(&rect, &p(&j));
            worst = worst.max((phi - cache.probability(&p(&j), 2.0)).abs());
            let tau = -phi.ln() / rect.section();
            for e in 0..j.len() {
                let mut jj = j.clone();
                jj[e] *= g.gen::<f64>();
                if -disconnection(&rect, &p(&jj)).ln() / rect.section() > tau + 1e-12 {
                    violations += 1;
                }
            }
            let zero: Vec<f64> = vec![0.0; j.len()].iter().map(|&x| edge_probability(beta, x)).collect();
            if disconnection(&rect, &zero) != 1.0 {
                violations += 1;
            }
        }
    }
    let pass = lib.pass && worst < 1e-12 && violations == 0;
    (pass, format!("{}; oracle on {rects} rectangles: |Δ| {worst:.1e}, {violations} violations", lib.detail))
}

fn c9() -> Outcome {
    let lib = repro("9").unwrap();
    let n = 8;
    let lambda = 0.5;
    let u0 = GridProfile::block(8, 1, 2, 2, 4).unwrap();
    let (tr, tq) = (ReducedTension::constant(lambda), SurfaceTensionFn::L1);
    let (mut literal, mut corrected, mut droplets, mut agree) = (0, 0, 0, 0);
    let profiles = fuzzed_profiles(100, 0xacce).unwrap();
    for p in &profiles {
        let (u, z) = (p.cells(), u0.cells());
        let v: Vec<bool> = z.iter().zip(u).map(|(&a, &b)| a && !b).collect();
        let w: Vec<bool> = u.iter().zip(z).map(|(&a, &b)| a && !b).collect();
        let (fu, _, anti) = face_energies(u, z, n, lambda);
        let (f0, _, _) = face_energies(z, z, n, lambda);
        let lhs = fu - f0;
        let rhs = face_energies(&v, z, n, lambda).1 + face_energies(&w, z, n, lambda).1;
        literal += ((lhs - rhs).abs() <= 1e-12) as usize;
        corrected += ((lhs - rhs - 2.0 * anti).abs() <= 1e-12) as usize;
        let d = decompose_symmetric(&PhaseProfile::Grid(p.clone()), &PhaseProfile::Grid(u0.clone()), &tr, &tq).unwrap();
        agree += ((d.lhs - lhs).abs() < 1e-12 && (d.rhs - rhs).abs() < 1e-12 && (d.anti_contact - anti).abs() < 1e-12) as usize;
        let mut ok = true;
        for h in [0.25, 0.5] {
            let dd = decompose_droplets(&PhaseProfile::Grid(p.clone()), &PhaseProfile::Grid(u0.clone()), &tr, &tq, h).unwrap();
            // droplets partition the minus cells of u
            let mut cover = vec![0usize; n * n];
            for g in &dd.droplets {
                for (c, &m) in g.cells().iter().enumerate() {
                    cover[c] += m as usize;
                }
            }
            ok &= dd.holds && cover.iter().zip(u).all(|(&k, &m)| k == m as usize);
        }
        droplets += ok as usize;
    }
    assert_eq!(agree, 100, "library energies disagree with the face-count oracle");
    assert_eq!(corrected, 100, "identity fails even with the anti-contact term");
    assert_eq!(droplets, 100, "droplet inequality violated");
    let pass = lib.pass && literal == 100 && droplets == 100;
    (pass, format!("{}; oracle: literal {literal}/100, with anti-contact {corrected}/100", lib.detail))
}

fn c10() -> Outcome {
    let lib = repro("10").unwrap();
    // order along a coupled run, replayed here
    let l = boxed(&[(-1, 1), (-1, 1)]);
    let field = random_field(&l, &mut rng(1000));
    let low = SpinConfig::constant(l.clone(), -1, Boundary::Plus).unwrap();
    let high = SpinConfig::constant(l.clone(), 1, Boundary::Plus).unwrap();
    let mut violations = 0;
    let mut events = 0;
    for (k, model) in [RateModel::heat_bath(1.2), RateModel::metropolis(1.2)].into_iter().enumerate() {
        let (a, b) = simulate_coupled(&field, &model, &low, &high, 200.0, DynamicsSeed::new(7, k as u64)).unwrap();
        assert_eq!(a.events.len(), b.events.len());
        let (mut x, mut y) = (low.spins().to_vec(), high.spins().to_vec());
        for (ea, eb) in a.events.iter().zip(&b.events) {
            assert!(ea.time == eb.time && ea.site == eb.site);
            x[ea.site] = ea.spin_after;
            y[eb.site] = eb.spin_after;
            violations += x.iter().zip(&y).any(|(p, q)| p > q) as usize;
        }
        events += a.events.len();
    }
    // Poisson law of attempted events
    let small = boxed(&[(0, 1), (0, 1)]);
    let flat = CouplingField::uniform(small.clone(), 1.0).unwrap();
    let model = RateModel::heat_bath(0.7);
    let t = 0.6;
    let plus = SpinConfig::constant(small.clone(), 1, Boundary::Plus).unwrap();
    let counts: Vec<u64> =
        (0..1000).map(|r| simulate(&flat, &model, &plus, t, DynamicsSeed::new(11, r)).unwrap().attempts() as u64).collect();
    let mean_count = t * small.len() as f64; // heat-bath clock is 1
    let kmax = *counts.iter().max().unwrap() as usize;
    let mut pmf = vec![(-mean_count).exp()];
    for k in 1..=kmax {
        pmf.push(pmf[k - 1] * mean_count / k as f64);
    }
    let mut tv = 0.5 * (1.0 - pmf.iter().sum::<f64>());
    for (k, q) in pmf.iter().enumerate() {
        let emp = counts.iter().filter(|&&c| c as usize == k).count() as f64 / 1000.0;
        tv += 0.5 * (emp - q).abs();
    }
    let tv_agree = (tv - poisson_tv(&counts, mean_count)).abs() < 1e-12;
    // A^λ(t) on a 2×2 box against the exact semigroup
    let field = random_field(&small, &mut rng(1001));
    let beta = 0.9;
    let mu = gibbs(&field, beta);
    let sg = Semigroup::new(&generator(&mu, 4, Kind::HeatBath), &mu);
    let pi0 = spin_fn(16, small.origin().unwrap());
    let mut worst_z: f64 = 0.0;
    for lambda in [1.0, 0.5] {
        let times = [0.0, 0.3, 0.8, 1.5];
        let cfg = AutocorrelationConfig {
            starts: 3000,
            replicas: 4,
            seed: 13,
            method: VarianceMethod::ReplicaPairs,
            exact_cap: 16,
            burn_in: 0.0,
        };
        let curve = estimate_autocorrelation(std::slice::from_ref(&field), &RateModel::heat_bath(beta), lambda, &times, &cfg).unwrap();
        for p in &curve.points {
            let exact = var(&mu, &sg.apply(&pi0, p.t)).powf(lambda);
            let err = (p.estimate - exact).abs();
            worst_z = worst_z.max(if err <= 1e-12 { 0.0 } else { err / p.stderr });
        }
    }
    let pass = lib.pass && violations == 0 && tv < 0.05 && tv_agree && worst_z <= 4.0;
    (pass, format!("{}; oracle: {events} events, {violations} violations, TV {tv:.4}, max |z| {worst_z:.2}", lib.detail))
}

fn c11() -> Outcome {
    let lib = repro("11").unwrap();
    let (r, lambda, p0) = (0.25f64, 0.5f64, (-1.0f64).exp());
    let rate = RateFunctionModel::BernoulliBound { p_zero: p0, tau_min: 0.0, tau_q: 1.0 };
    // disk at exponent 1: dilution cost of the ℓ¹ perimeter 8r at −ln p₀ per
    // unit length, plus the reduced energy 2πrτ^r of the circle, over the
    // chord-sweep barrier
    let barrier = 2.0 * r * ((1.0 - lambda * lambda).sqrt() - lambda * lambda.acos());
    let x_hand = (8.0 * r * -p0.ln() + 2.0 * PI * r * lambda) / barrier;
    // square of side 2r at exponent 0: cost 8r over the barrier 2r(1 − τ^r)
    let kappa_hand = 2.0 / (8.0 * r * -p0.ln() / (2.0 * r * (1.0 - lambda)));
    let disk = Candidate {
        u0: PhaseProfile::disk([0.5, 0.5], r),
        tau_r: ReducedTension::constant(lambda),
        tau_q: SurfaceTensionFn::isotropic(1.0),
        rate: rate.clone(),
        jump_cells: None,
    };
    let square = Candidate {
        u0: PhaseProfile::square([0.5, 0.5], 2.0 * r),
        tau_r: ReducedTension::constant(lambda),
        tau_q: SurfaceTensionFn::L1,
        rate,
        jump_cells: None,
    };
    let x = exponent_xlambda(&[disk], 1.0).unwrap().value;
    let k = kappa(&[square], 2).unwrap();
    let pass = lib.pass && (x - x_hand).abs() < 1e-6 && (x - 16.27).abs() < 5e-3 && (k - kappa_hand).abs() < 1e-6;
    (pass, format!("{}; hand X {x_hand:.7}, κ {kappa_hand}", lib.detail))
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Outcome); 11] = [
        (1, "es-marginals", c1),
        (2, "detailed-balance", c2),
        (3, "spectral-facts", c3),
        (4, "plus-state-bound", c4),
        (5, "disk-barrier", c5),
        (6, "square-barrier", c6),
        (7, "constrained-square", c7),
        (8, "tension-monotonicity", c8),
        (9, "geometry-identities", c9),
        (10, "dynamics", c10),
        (11, "exponents", c11),
    ];
    // stated values that cannot be met; see the module docs
    let known = [5, 9];
    let mut unexpected = Vec::new();
    for (id, slug, f) in criteria {
        let start = Instant::now();
        let (pass, detail) = f();
        println!(
            "criterion {id:>2} {slug:<21} {} ({:.1}s) {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if !pass && !known.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
