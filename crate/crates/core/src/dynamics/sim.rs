use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rates::RateModel;
use crate::model::{CouplingField, SpinConfig};
use crate::seeding;
use crate::{Error, Result};

/// One clock ring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub site: usize,
    pub accepted: bool,
    pub spin_after: i8,
}

/// A sampled path of the dynamics: every attempted update up to `t_end`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub initial: SpinConfig,
    pub events: Vec<Event>,
    pub t_end: f64,
    /// Per-site clock intensity used by the construction.
    pub clock: f64,
}

impl Trajectory {
    pub fn attempts(&self) -> usize {
        self.events.len()
    }

    pub fn accepted(&self) -> usize {
        self.events.iter().filter(|e| e.accepted).count()
    }

    /// Re-apply the recorded events to the initial configuration.
    pub fn replay(&self) -> Result<SpinConfig> {
        let mut s = self.initial.clone();
        let mut last = f64::NEG_INFINITY;
        for (k, e) in self.events.iter().enumerate() {
            if !(e.time > last) || e.time > self.t_end {
                return Err(Error::Contract(format!("event {k} is out of time order")));
            }
            last = e.time;
            if e.site >= s.spins().len() {
                return Err(Error::Contract(format!("event {k} names site {} outside the box", e.site)));
            }
            let before = s.spin(e.site);
            let expect = if e.accepted { -before } else { before };
            if e.spin_after != expect {
                return Err(Error::Contract(format!("event {k} is inconsistent with the replayed state")));
            }
            s.set(e.site, e.spin_after);
        }
        Ok(s)
    }

    /// State at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> SpinConfig {
        let mut s = self.initial.clone();
        for e in self.events.iter().take_while(|e| e.time <= t) {
            s.set(e.site, e.spin_after);
        }
        s
    }

    pub fn final_state(&self) -> SpinConfig {
        self.state_at(f64::INFINITY)
    }

    /// CSV dump with columns `time,site_index,accepted,spin_after`, preceded
    /// by `#` lines carrying the horizon, clock and initial spins.
    pub fn to_csv(&self) -> String {
        let init: String = self.initial.spins().iter().map(|&s| if s == 1 { '+' } else { '-' }).collect();
        let mut out = format!("# t_end={}\n# clock={}\n# initial={init}\ntime,site_index,accepted,spin_after\n", self.t_end, self.clock);
        for e in &self.events {
            let _ = writeln!(out, "{},{},{},{}", e.time, e.site, e.accepted as u8, e.spin_after);
        }
        out
    }
}

/// Contents of a trajectory CSV, before it is attached to a box.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub t_end: Option<f64>,
    pub clock: Option<f64>,
    pub initial: Option<Vec<i8>>,
    pub events: Vec<Event>,
}

impl TrajectoryRecord {
    /// Attach to a box; the record must carry the initial spins and replay
    /// consistently.
    pub fn into_trajectory(self, template: &SpinConfig) -> Result<Trajectory> {
        let init = self.initial.ok_or_else(|| Error::Contract("record has no initial configuration".into()))?;
        let initial = SpinConfig::new(template.lattice().clone(), init, template.boundary().clone())?;
        let t_end = self.t_end.unwrap_or_else(|| self.events.last().map_or(0.0, |e| e.time));
        let traj = Trajectory { initial, events: self.events, t_end, clock: self.clock.unwrap_or(f64::NAN) };
        traj.replay()?;
        Ok(traj)
    }
}

pub fn parse_trajectory_csv(text: &str) -> Result<TrajectoryRecord> {
    let mut rec = TrajectoryRecord { t_end: None, clock: None, initial: None, events: Vec::new() };
    let mut header_seen = false;
    let mut last = f64::NEG_INFINITY;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            let c = c.trim();
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite() && *x >= 0.0)
                    .ok_or_else(|| Error::parse(ln, format!("bad number `{v}`")))
            };
            if let Some(v) = c.strip_prefix("t_end=") {
                rec.t_end = Some(num(v)?);
            } else if let Some(v) = c.strip_prefix("clock=") {
                rec.clock = Some(num(v)?);
            } else if let Some(v) = c.strip_prefix("initial=") {
                rec.initial = Some(
                    v.chars()
                        .map(|ch| match ch {
                            '+' => Ok(1),
                            '-' => Ok(-1),
                            _ => Err(Error::parse(ln, format!("bad spin `{ch}`"))),
                        })
                        .collect::<Result<_>>()?,
                );
            }
            continue;
        }
        if !header_seen {
            if line != "time,site_index,accepted,spin_after" {
                return Err(Error::parse(ln, "missing column header"));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let [t, s, a, sp] = cols[..] else {
            return Err(Error::parse(ln, format!("expected 4 columns, found {}", cols.len())));
        };
        let time: f64 = t.parse().map_err(|_| Error::parse(ln, "bad time"))?;
        if !time.is_finite() || time < 0.0 || time <= last {
            return Err(Error::parse(ln, "event times must be finite and strictly increasing"));
        }
        last = time;
        let site: usize = s.parse().map_err(|_| Error::parse(ln, "bad site index"))?;
        let accepted = match a {
            "0" => false,
            "1" => true,
            _ => return Err(Error::parse(ln, "accepted must be 0 or 1")),
        };
        let spin_after = match sp {
            "1" => 1,
            "-1" => -1,
            _ => return Err(Error::parse(ln, "spin must be 1 or -1")),
        };
        rec.events.push(Event { time, site, accepted, spin_after });
    }
    if !header_seen {
        return Err(Error::parse(0, "missing column header"));
    }
    if let (Some(t_end), Some(e)) = (rec.t_end, rec.events.last()) {
        if e.time > t_end {
            return Err(Error::parse(0, "event after the horizon"));
        }
    }
    Ok(rec)
}

/// Seed of one dynamics run: a master seed and a replica index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsSeed {
    pub master: u64,
    pub replica: u64,
}

impl DynamicsSeed {
    pub fn new(master: u64, replica: u64) -> Self {
        DynamicsSeed { master, replica }
    }

    pub fn stream(&self) -> seeding::Stream {
        seeding::stream(self.master, "dynamics", self.replica)
    }
}

/// New spin at a ring with uniform `u`: `+` iff `u ≥ T`, where `T` is the
/// probability of ending at `-`.
#[inline]
fn update(model: &RateModel, field: &CouplingField, s: &SpinConfig, x: usize, clock: f64, u: f64) -> i8 {
    let p = model.rate(field, s, x) / clock;
    let threshold = if s.spin(x) == 1 { p } else { 1.0 - p };
    if u >= threshold {
        1
    } else {
        -1
    }
}

pub(crate) fn clock_for(model: &RateModel, field: &CouplingField) -> Result<f64> {
    model.clock(field.lattice().dim(), field.max_value())
}

fn check_inputs(field: &CouplingField, sigma: &SpinConfig, t_end: f64) -> Result<()> {
    if !field.same_lattice(sigma.lattice()) {
        return Err(Error::Domain("field and configuration live on different boxes".into()));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("horizon {t_end} must be finite and >= 0")));
    }
    Ok(())
}

/// Graphical construction: one Poisson stream of intensity `clock · |Λ|`,
/// a uniform site per ring and a uniform deciding the new spin.
pub fn simulate(
    field: &CouplingField,
    model: &RateModel,
    sigma0: &SpinConfig,
    t_end: f64,
    seed: DynamicsSeed,
) -> Result<Trajectory> {
    check_inputs(field, sigma0, t_end)?;
    let clock = clock_for(model, field)?;
    let n = sigma0.spins().len();
    let total = clock * n as f64;
    let mut rng = seed.stream();
    let mut s = sigma0.clone();
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        t += -(1.0 - rng.gen::<f64>()).ln() / total;
        if t > t_end {
            break;
        }
        let x = rng.gen_range(0..n);
        let u: f64 = rng.gen();
        let new = update(model, field, &s, x, clock, u);
        let accepted = new != s.spin(x);
        s.set(x, new);
        events.push(Event { time: t, site: x, accepted, spin_after: new });
    }
    Ok(Trajectory { initial: sigma0.clone(), events, t_end, clock })
}

/// Evolve without recording the path.
pub fn evolve(
    field: &CouplingField,
    model: &RateModel,
    sigma: &mut SpinConfig,
    t: f64,
    clock: f64,
    rng: &mut impl Rng,
) {
    let n = sigma.spins().len();
    let total = clock * n as f64;
    let mut now = 0.0;
    loop {
        now += -(1.0 - rng.gen::<f64>()).ln() / total;
        if now > t {
            return;
        }
        let x = rng.gen_range(0..n);
        let u: f64 = rng.gen();
        let new = update(model, field, sigma, x, clock, u);
        sigma.set(x, new);
    }
}

/// Two copies driven by the same rings and uniforms. For attractive models
/// started from `low ≤ high` the order is preserved at every event.
pub fn simulate_coupled(
    field: &CouplingField,
    model: &RateModel,
    low: &SpinConfig,
    high: &SpinConfig,
    t_end: f64,
    seed: DynamicsSeed,
) -> Result<(Trajectory, Trajectory)> {
    check_inputs(field, low, t_end)?;
    check_inputs(field, high, t_end)?;
    if !model.is_attractive() {
        return Err(Error::Model("monotone coupling needs an attractive rate model".into()));
    }
    if !low.le(high) {
        return Err(Error::Domain("coupled starts must satisfy low <= high".into()));
    }
    let clock = clock_for(model, field)?;
    let n = low.spins().len();
    let total = clock * n as f64;
    let mut rng = seed.stream();
    let (mut a, mut b) = (low.clone(), high.clone());
    let (mut ea, mut eb) = (Vec::new(), Vec::new());
    let mut t = 0.0;
    loop {
        t += -(1.0 - rng.gen::<f64>()).ln() / total;
        if t > t_end {
            break;
        }
        let x = rng.gen_range(0..n);
        let u: f64 = rng.gen();
        for (s, ev) in [(&mut a, &mut ea), (&mut b, &mut eb)] {
            let new = update(model, field, s, x, clock, u);
            let accepted = new != s.spin(x);
            s.set(x, new);
            ev.push(Event { time: t, site: x, accepted, spin_after: new });
        }
        if a.spin(x) > b.spin(x) {
            return Err(Error::Contract(format!("coupling lost monotonicity at t={t}, site {x}")));
        }
    }
    Ok((
        Trajectory { initial: low.clone(), events: ea, t_end, clock },
        Trajectory { initial: high.clone(), events: eb, t_end, clock },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, DisorderSpec, LatticeBox};
    use std::sync::Arc;

    fn setup() -> (CouplingField, SpinConfig) {
        let l = Arc::new(LatticeBox::from_ranges(&[(0, 3), (0, 3)]).unwrap());
        let f = CouplingField::sample(l.clone(), &DisorderSpec::bernoulli(0.25, 5)).unwrap();
        let s = SpinConfig::constant(l, -1, Boundary::Plus).unwrap();
        (f, s)
    }

    #[test]
    fn zero_horizon_and_replay() {
        let (f, s) = setup();
        let m = RateModel::metropolis(0.6);
        let t = simulate(&f, &m, &s, 0.0, DynamicsSeed::new(1, 0)).unwrap();
        assert!(t.events.is_empty());
        assert_eq!(t.final_state(), s);
        let t = simulate(&f, &m, &s, 3.0, DynamicsSeed::new(1, 0)).unwrap();
        assert!(t.attempts() > 0);
        assert_eq!(t.replay().unwrap(), t.final_state());
        let again = simulate(&f, &m, &s, 3.0, DynamicsSeed::new(1, 0)).unwrap();
        assert_eq!(t, again);
        assert_ne!(t.events, simulate(&f, &m, &s, 3.0, DynamicsSeed::new(1, 1)).unwrap().events);
    }

    #[test]
    fn csv_roundtrip() {
        let (f, s) = setup();
        let t = simulate(&f, &RateModel::heat_bath(0.4), &s, 2.0, DynamicsSeed::new(9, 2)).unwrap();
        let rec = parse_trajectory_csv(&t.to_csv()).unwrap();
        let back = rec.into_trajectory(&s).unwrap();
        assert_eq!(back, t);
        assert!(parse_trajectory_csv("time,site_index,accepted,spin_after\n1,0,1,1\n0.5,0,1,-1\n").is_err());
    }

    #[test]
    fn coupled_order_and_coalescence() {
        let (f, low) = setup();
        let high = SpinConfig::constant(low.lattice().clone(), 1, Boundary::Plus).unwrap();
        let m = RateModel::heat_bath(2.0);
        let (a, b) = simulate_coupled(&f, &m, &low, &high, 200.0, DynamicsSeed::new(3, 0)).unwrap();
        assert_eq!(a.events.len(), b.events.len());
        let (x, y) = simulate_coupled(&f, &m, &low, &low, 5.0, DynamicsSeed::new(3, 0)).unwrap();
        assert_eq!(x.events, y.events);
        let bad = RateModel::custom(0.5, vec![(-4.0, 0.1), (4.0, 1.0)]);
        assert!(simulate_coupled(&f, &bad, &low, &high, 1.0, DynamicsSeed::new(0, 0)).is_err());
        assert!(simulate_coupled(&f, &m, &high, &low, 1.0, DynamicsSeed::new(0, 0)).is_err());
        // at low temperature the two copies should have merged by the end
        assert_eq!(a.final_state(), b.final_state());
    }
}
