//! Ricci flow `∂g/∂t = −2 Ric` restricted to the two-parameter families
//! `ρ·g_λ` (Chow–Yang) and `ρ·(λ² g_FS + g_M)` (canonical), in the
//! coordinates `μ = λ²`, `ρ`.

// Negated comparisons below deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ode;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num::{BigRational, FromPrimitive, Num};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::coefficient::rational;
use crate::error::{Error, Result};
use crate::frame::CurvatureModel;
use crate::matrix::CoefficientMatrix;
use crate::report::VerificationReport;

use ode::{Stop, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Cy,
    Canonical,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::Cy, Family::Canonical];

    pub fn name(self) -> &'static str {
        match self {
            Family::Cy => "cy",
            Family::Canonical => "canonical",
        }
    }

    /// Values of `μ` where `dμ/dt` vanishes identically.
    pub fn fixed_points(self) -> &'static [f64] {
        match self {
            Family::Cy => &[1.0],
            Family::Canonical => &[0.5, 1.0],
        }
    }

    pub fn fixed_points_exact(self) -> Vec<BigRational> {
        match self {
            Family::Cy => vec![rational(1, 1)],
            Family::Canonical => vec![rational(1, 2), rational(1, 1)],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cy" => Ok(Family::Cy),
            "canonical" => Ok(Family::Canonical),
            other => Err(format!("unknown family `{other}` (expected cy or canonical)")),
        }
    }
}

/// Scalars the closed-form maps are generic over (`f64`, `BigRational`).
pub trait Scalar: Clone + Num + FromPrimitive + PartialOrd + fmt::Display {}

impl<T: Clone + Num + FromPrimitive + PartialOrd + fmt::Display> Scalar for T {}

fn k<T: Scalar>(n: i64) -> T {
    T::from_i64(n).expect("small integer is representable")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyPoint<T = f64> {
    pub family: Family,
    pub mu: T,
    pub rho: T,
}

impl<T: Scalar> FamilyPoint<T> {
    pub fn new(family: Family, mu: T, rho: T) -> Self {
        FamilyPoint { family, mu, rho }
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu > T::zero()) {
            return Err(Error::NonPositiveParameter {
                name: "mu",
                value: self.mu.to_string(),
            });
        }
        if !(self.rho > T::zero()) {
            return Err(Error::NonPositiveParameter {
                name: "rho",
                value: self.rho.to_string(),
            });
        }
        Ok(())
    }
}

/// The Ricci tensor of the metric at `p`, written as a point of the same
/// family: `Ric(ρ g) = ρ' g'`. Independent of `ρ`.
pub fn ricci_map<T: Scalar>(p: &FamilyPoint<T>) -> Result<FamilyPoint<T>> {
    p.validate()?;
    let mu = p.mu.clone();
    let one = T::one();
    match p.family {
        Family::Cy => {
            let a = one.clone() + k::<T>(3) * mu.clone();
            Ok(FamilyPoint::new(
                Family::Cy,
                k::<T>(2) * mu.clone() * (one + mu.clone()) / a.clone(),
                k::<T>(2) * a / mu,
            ))
        }
        Family::Canonical => {
            let b = k::<T>(3) - mu.clone();
            if !(b > T::zero()) {
                return Err(Error::RicciNotPositive(mu.to_string()));
            }
            Ok(FamilyPoint::new(
                Family::Canonical,
                (one + mu.clone() * mu) / b.clone(),
                k::<T>(4) * b,
            ))
        }
    }
}

/// `(dμ/dt, dρ/dt)`.
pub fn flow_rhs<T: Scalar>(p: &FamilyPoint<T>) -> Result<(T, T)> {
    p.validate()?;
    let (mu, rho) = (p.mu.clone(), p.rho.clone());
    let one = T::one();
    Ok(match p.family {
        Family::Cy => (
            k::<T>(4) * (mu.clone() - one.clone()) / rho,
            k::<T>(-4) * (one / mu + k::<T>(3)),
        ),
        Family::Canonical => (
            k::<T>(-8) * (mu.clone() - one.clone()) * (k::<T>(2) * mu.clone() - one) / rho,
            k::<T>(-8) * (k::<T>(3) - mu),
        ),
    })
}

fn on_fixed_ray<T: Scalar>(family: Family, mu: &T) -> bool {
    let two = k::<T>(2);
    match family {
        Family::Cy => *mu == T::one(),
        Family::Canonical => *mu == T::one() || mu.clone() * two == T::one(),
    }
}

/// First integral `C`: `ρ(1−μ)⁴/μ` (Chow–Yang) or `ρ|2μ−1|^{5/2}/(μ−1)²`
/// (canonical).
pub fn invariant(p: &FamilyPoint<f64>) -> Result<f64> {
    p.validate()?;
    if on_fixed_ray(p.family, &p.mu) {
        return Err(Error::OnFixedRay(p.mu.to_string()));
    }
    let (mu, rho) = (p.mu, p.rho);
    Ok(match p.family {
        Family::Cy => rho * (1.0 - mu).powi(4) / mu,
        Family::Canonical => rho * (2.0 * mu - 1.0).abs().powf(2.5) / (mu - 1.0).powi(2),
    })
}

/// Exact Chow–Yang invariant (the canonical one is irrational in general).
pub fn cy_invariant_exact(mu: &BigRational, rho: &BigRational) -> Result<BigRational> {
    let p = FamilyPoint::new(Family::Cy, mu.clone(), rho.clone());
    p.validate()?;
    if on_fixed_ray(Family::Cy, mu) {
        return Err(Error::OnFixedRay(mu.to_string()));
    }
    let one = rational(1, 1);
    let d = &one - mu;
    let d2 = &d * &d;
    Ok(rho * &d2 * &d2 / mu)
}

/// `(∂ ln C/∂μ, ∂ ln C/∂ρ)`, rational in `(μ, ρ)` for both families.
pub fn invariant_log_gradient<T: Scalar>(p: &FamilyPoint<T>) -> Result<(T, T)> {
    p.validate()?;
    if on_fixed_ray(p.family, &p.mu) {
        return Err(Error::OnFixedRay(p.mu.to_string()));
    }
    let (mu, rho) = (p.mu.clone(), p.rho.clone());
    let one = T::one();
    let d_rho = one.clone() / rho;
    let d_mu = match p.family {
        Family::Cy => k::<T>(4) / (mu.clone() - one.clone()) - one / mu,
        Family::Canonical => k::<T>(5) / (k::<T>(2) * mu.clone() - one.clone()) - k::<T>(2) / (mu - one),
    };
    Ok((d_mu, d_rho))
}

fn cy_ricci_formal() -> &'static CoefficientMatrix {
    static RICCI: OnceLock<CoefficientMatrix> = OnceLock::new();
    RICCI.get_or_init(|| {
        crate::twistor::cy_ricci(CurvatureModel::FormalW).expect("Ricci contraction of the twistor frame")
    })
}

/// Ricci coefficients of `g_λ` at `μ = λ²` read off the curvature engine:
/// `(vertical, horizontal)` with the vertical one taken as a tensor on
/// `α²`, i.e. `μ·Ric(λα, λα)`.
pub fn metric_ricci_coefficients(mu: &BigRational) -> Result<(BigRational, BigRational)> {
    let ric = cy_ricci_formal();
    let fiber = ric
        .get(0, 0)
        .substitute_lambda_sq(mu)?
        .as_rational()
        .ok_or(Error::NotUnivariate)?;
    let base = ric
        .get(2, 2)
        .substitute_lambda_sq(mu)?
        .as_rational()
        .ok_or(Error::NotUnivariate)?;
    Ok((mu * fiber, base))
}

// ---------------------------------------------------------------------------
// Numerical integration

/// Default extinction threshold on `ρ`.
pub const RHO_FLOOR: f64 = 1e-12;
/// `μ` above `MU_CEILING`, or canonical `μ` below `MU_FLOOR`, is reported
/// as a parameter blow-up.
pub const MU_FLOOR: f64 = 1e-12;
pub const MU_CEILING: f64 = 1e12;
/// Below this distance from a fixed point the exact ray solution is used.
pub const RAY_TOLERANCE: f64 = 1e-13;
/// Event times are bracketed to this width.
pub const EVENT_RESOLUTION: f64 = 1e-12;
/// Canonical forward runs from `μ ≥ 3` switch to `ρ` as independent
/// variable once `μ` drops below this level (`dρ/dt < 0` from there on).
const CANONICAL_SWITCH: f64 = 2.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    Time(f64),
    /// Until extinction or blow-up.
    End,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrateOptions {
    /// Backward end of the span, `≤ 0`.
    pub t0: f64,
    /// Forward end of the span.
    pub t1: Horizon,
    pub rel_tol: f64,
    /// Stop (in either direction) when `μ` crosses this level.
    pub stop_at_mu: Option<f64>,
    /// Extinction is reported when `ρ` drops to this level.
    pub rho_floor: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            t0: 0.0,
            t1: Horizon::End,
            rel_tol: 1e-10,
            stop_at_mu: None,
            rho_floor: RHO_FLOOR,
            max_steps: 500_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub mu: f64,
    pub rho: f64,
    /// `NaN` on a fixed ray.
    pub invariant: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Extinction,
    ParameterBlowup,
    FixedRay,
    MuLevel,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Extinction => "extinction",
            EventKind::ParameterBlowup => "parameter-blowup",
            EventKind::FixedRay => "fixed-ray",
            EventKind::MuLevel => "mu-level",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub mu: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowTrajectory {
    pub family: Family,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    /// `max |C(t) − C(0)| / |C(0)|` over the samples; 0 on a fixed ray.
    pub max_drift: f64,
    pub rel_tol: f64,
}

impl FlowTrajectory {
    pub fn initial(&self) -> Option<&Sample> {
        self.samples.iter().find(|s| s.t == 0.0)
    }

    pub fn sample_at(&self, t: f64) -> Option<&Sample> {
        self.samples.iter().find(|s| s.t == t)
    }

    /// Terminal event of the forward leg, if any.
    pub fn forward_event(&self) -> Option<&Event> {
        self.events
            .iter()
            .filter(|e| e.t > 0.0 && e.kind != EventKind::FixedRay)
            .max_by(|a, b| a.t.total_cmp(&b.t))
    }

    /// Terminal event of the backward leg, if any.
    pub fn backward_event(&self) -> Option<&Event> {
        self.events
            .iter()
            .filter(|e| e.t < 0.0 && e.kind != EventKind::FixedRay)
            .min_by(|a, b| a.t.total_cmp(&b.t))
    }
}

fn raw_rhs(family: Family, mu: f64, rho: f64) -> (f64, f64) {
    match family {
        Family::Cy => (4.0 * (mu - 1.0) / rho, -4.0 * (1.0 / mu + 3.0)),
        Family::Canonical => (-8.0 * (mu - 1.0) * (2.0 * mu - 1.0) / rho, -8.0 * (3.0 - mu)),
    }
}

/// `(dt/ds, dμ/ds)` with `s = ln ρ`, simplified so it stays regular at `μ = 0`.
fn log_rho_rhs(family: Family, rho: f64, mu: f64) -> (f64, f64) {
    match family {
        Family::Cy => (-rho * mu / (4.0 * (1.0 + 3.0 * mu)), mu * (1.0 - mu) / (1.0 + 3.0 * mu)),
        Family::Canonical => (-rho / (8.0 * (3.0 - mu)), (mu - 1.0) * (2.0 * mu - 1.0) / (3.0 - mu)),
    }
}

fn finite2(v: (f64, f64)) -> Option<[f64; 2]> {
    (v.0.is_finite() && v.1.is_finite()).then_some([v.0, v.1])
}

/// Independent variable of one integration leg.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Chart {
    /// `x = t`, `y = (m, ρ)`.
    Time,
    /// `x = ln ρ`, `y = (t, m)`; requires `dρ/dt < 0` along the leg.
    LogRho,
    /// `x = ln μ`, `y = (t, ρ)`; requires `μ` increasing along the leg.
    LogMu,
}

/// `μ` is carried as `m = μ − shift`, where `shift` is the value the leg
/// approaches, so error control is relative to the distance from it.
#[derive(Clone, Copy, Debug)]
struct LegSetup {
    family: Family,
    chart: Chart,
    shift: f64,
}

impl LegSetup {
    fn point(&self, x: f64, y: &[f64; 2]) -> (f64, f64, f64) {
        match self.chart {
            Chart::Time => (x, y[0] + self.shift, y[1]),
            Chart::LogRho => (y[0], y[1] + self.shift, x.exp()),
            Chart::LogMu => (y[0], x.exp(), y[1]),
        }
    }

    fn state(&self, (t, mu, rho): (f64, f64, f64)) -> (f64, [f64; 2]) {
        match self.chart {
            Chart::Time => (t, [mu - self.shift, rho]),
            Chart::LogRho => (rho.ln(), [t, mu - self.shift]),
            Chart::LogMu => (mu.ln(), [t, rho]),
        }
    }

    fn time(&self, x: f64, y: &[f64; 2]) -> f64 {
        match self.chart {
            Chart::Time => x,
            Chart::LogRho | Chart::LogMu => y[0],
        }
    }

    fn rhs(&self, x: f64, y: &[f64; 2]) -> Option<[f64; 2]> {
        let (_, mu, rho) = self.point(x, y);
        match self.chart {
            Chart::Time => {
                if mu <= 0.0 || rho <= 0.0 {
                    return None;
                }
                finite2(raw_rhs(self.family, mu, rho))
            }
            Chart::LogRho => finite2(log_rho_rhs(self.family, rho, mu)),
            Chart::LogMu => {
                let (dmu, drho) = raw_rhs(self.family, mu, rho);
                let dt = mu / dmu;
                finite2((dt, drho * dt))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tag {
    Event(EventKind),
    /// Hand over to the next leg.
    Switch,
    /// `t` reached the requested end of the span.
    Horizon,
}

struct Leg {
    /// `(t, μ, ρ)` in order of integration, starting with the initial point.
    points: Vec<(f64, f64, f64)>,
    event: Option<Event>,
    switched: bool,
}

type PointFn = Box<dyn Fn(f64, f64, f64) -> f64>;

struct LegRun {
    setup: LegSetup,
    start: (f64, f64, f64),
    /// End of the independent variable and the event reported on reaching it.
    x_end: f64,
    end_event: Option<EventKind>,
    /// End of the time span, for charts other than [`Chart::Time`].
    horizon: Option<f64>,
    switch_below: Option<f64>,
}

fn run_leg(run: &LegRun, opts: &IntegrateOptions) -> Result<Leg> {
    let setup = run.setup;
    let floor = opts.rho_floor;
    let mut tagged: Vec<(Tag, PointFn)> = vec![
        (
            Tag::Event(EventKind::Extinction),
            Box::new(move |_, _, rho| rho - floor),
        ),
        (
            Tag::Event(EventKind::ParameterBlowup),
            Box::new(|_, mu, _| mu - MU_CEILING),
        ),
    ];
    // Chow–Yang μ only reaches 0 together with ρ; that is extinction.
    if setup.family == Family::Canonical {
        tagged.push((
            Tag::Event(EventKind::ParameterBlowup),
            Box::new(|_, mu, _| mu - MU_FLOOR),
        ));
    }
    if let Some(level) = opts.stop_at_mu {
        tagged.push((Tag::Event(EventKind::MuLevel), Box::new(move |_, mu, _| mu - level)));
    }
    if let Some(level) = run.switch_below {
        tagged.push((Tag::Switch, Box::new(move |_, mu, _| mu - level)));
    }
    if let Some(t_end) = run.horizon {
        tagged.push((Tag::Horizon, Box::new(move |t, _, _| t - t_end)));
    }
    let gs: Vec<Box<ode::EventFn<2>>> = tagged
        .iter()
        .map(|(_, g)| {
            let g: &PointFn = g;
            Box::new(move |x: f64, y: &[f64; 2]| {
                let (t, mu, rho) = setup.point(x, y);
                g(t, mu, rho)
            }) as Box<ode::EventFn<2>>
        })
        .collect();
    let refs: Vec<&ode::EventFn<2>> = gs.iter().map(|g| g.as_ref()).collect();

    let atol_t = opts.rel_tol * 1e-4 * run.start.2;
    let atol = match setup.chart {
        Chart::Time => [1e-300, 1e-300],
        Chart::LogRho | Chart::LogMu => [atol_t, 1e-300],
    };
    let tol = Tolerances {
        rtol: opts.rel_tol,
        atol,
        max_steps: opts.max_steps,
    };
    let (x0, y0) = setup.state(run.start);
    let f = |x: f64, y: &[f64; 2]| setup.rhs(x, y);
    let out = ode::integrate(
        &f,
        x0,
        y0,
        run.x_end,
        &tol,
        &refs,
        &|x, y| setup.time(x, y),
        EVENT_RESOLUTION,
    );

    let mut points: Vec<_> = out.path.iter().map(|(x, y)| setup.point(*x, y)).collect();
    points[0] = run.start;
    let last = *points.last().expect("path contains the initial point");
    let event_at = |kind: EventKind, t: f64| Event {
        kind,
        t,
        mu: last.1,
        rho: last.2,
    };
    match out.stop {
        Stop::End => Ok(Leg {
            event: run.end_event.map(|kind| event_at(kind, last.0)),
            points,
            switched: false,
        }),
        Stop::Event(i) => {
            let (xh, yh) = out.crossing.expect("event carries its bracket");
            let hi = setup.point(xh, &yh);
            match tagged[i].0 {
                Tag::Switch => Ok(Leg {
                    points,
                    event: None,
                    switched: true,
                }),
                Tag::Horizon => {
                    // The bracket is narrower than the event resolution:
                    // land on the horizon exactly.
                    let t_end = run.horizon.expect("horizon event implies a horizon");
                    if (t_end - last.0).abs() > 0.0 {
                        points.push((t_end, hi.1, hi.2));
                    }
                    Ok(Leg {
                        points,
                        event: None,
                        switched: false,
                    })
                }
                Tag::Event(kind) => Ok(Leg {
                    points,
                    event: Some(event_at(kind, 0.5 * (last.0 + hi.0))),
                    switched: false,
                }),
            }
        }
        Stop::Underflow | Stop::MaxSteps => Err(Error::StepUnderflow {
            t: last.0,
            mu: last.1,
            rho: last.2,
        }),
    }
}

/// Backward leg from `t = 0` to `t0 < 0`.
fn backward_leg(p: &FamilyPoint<f64>, t0: f64) -> LegRun {
    let start = (0.0, p.mu, p.rho);
    match p.family {
        // μ → ∞ in finite backward time: parametrize by ln μ.
        Family::Canonical if p.mu > 1.0 => LegRun {
            setup: LegSetup {
                family: p.family,
                chart: Chart::LogMu,
                shift: 0.0,
            },
            start,
            x_end: MU_CEILING.ln(),
            end_event: Some(EventKind::ParameterBlowup),
            horizon: Some(t0),
            switch_below: None,
        },
        family => LegRun {
            setup: LegSetup {
                family,
                chart: Chart::Time,
                shift: if family == Family::Cy { 1.0 } else { 0.5 },
            },
            start,
            x_end: t0,
            end_event: None,
            horizon: None,
            switch_below: None,
        },
    }
}

/// Forward leg in `ln ρ` from `start`.
fn forward_leg(family: Family, start: (f64, f64, f64), opts: &IntegrateOptions) -> LegRun {
    let shift = match family {
        Family::Canonical if start.1 > 0.5 => 1.0,
        _ => 0.0,
    };
    LegRun {
        setup: LegSetup {
            family,
            chart: Chart::LogRho,
            shift,
        },
        start,
        x_end: opts.rho_floor.ln(),
        end_event: Some(EventKind::Extinction),
        horizon: match opts.t1 {
            Horizon::Time(t) => Some(t),
            Horizon::End => None,
        },
        switch_below: None,
    }
}

fn validate_options(opts: &IntegrateOptions) -> Result<()> {
    if !(opts.rel_tol > 0.0) {
        return Err(Error::InvalidOption(format!(
            "rel_tol must be positive, got {}",
            opts.rel_tol
        )));
    }
    if !(opts.rho_floor > 0.0) || !opts.rho_floor.is_finite() {
        return Err(Error::InvalidOption(format!(
            "rho_floor must be finite and positive, got {}",
            opts.rho_floor
        )));
    }
    if !(opts.t0 <= 0.0) || !opts.t0.is_finite() {
        return Err(Error::InvalidOption(format!(
            "t0 must be finite and <= 0, got {}",
            opts.t0
        )));
    }
    if let Horizon::Time(t1) = opts.t1 {
        if !(t1 >= 0.0) || !t1.is_finite() {
            return Err(Error::InvalidOption(format!("t1 must be finite and >= 0, got {t1}")));
        }
    }
    Ok(())
}

fn near_fixed_point(family: Family, mu: f64) -> Option<f64> {
    family
        .fixed_points()
        .iter()
        .copied()
        .find(|m| (mu - m).abs() < RAY_TOLERANCE)
}

/// Number of samples per leg on an exact ray.
const RAY_SAMPLES: usize = 128;

fn ray_trajectory(p: &FamilyPoint<f64>, opts: &IntegrateOptions) -> FlowTrajectory {
    let (_, slope) = raw_rhs(p.family, p.mu, p.rho);
    let rho0 = p.rho;
    let t_ext = rho0 / -slope;
    let t_floor = (rho0 - opts.rho_floor) / -slope;
    let mut events = vec![Event {
        kind: EventKind::FixedRay,
        t: 0.0,
        mu: p.mu,
        rho: rho0,
    }];
    let t_fwd = match opts.t1 {
        Horizon::Time(t1) if t1 < t_floor => t1,
        _ => {
            events.push(Event {
                kind: EventKind::Extinction,
                t: t_ext,
                mu: p.mu,
                rho: 0.0,
            });
            t_floor
        }
    };
    let sample = |t: f64| Sample {
        t,
        mu: p.mu,
        rho: if t == t_floor { opts.rho_floor } else { rho0 + slope * t },
        invariant: f64::NAN,
    };
    let mut samples = Vec::new();
    if opts.t0 < 0.0 {
        for i in 0..RAY_SAMPLES {
            samples.push(sample(opts.t0 * (1.0 - i as f64 / RAY_SAMPLES as f64)));
        }
    }
    samples.push(sample(0.0));
    if t_fwd > 0.0 {
        for i in 1..=RAY_SAMPLES {
            let t = if i == RAY_SAMPLES {
                t_fwd
            } else {
                t_fwd * i as f64 / RAY_SAMPLES as f64
            };
            samples.push(sample(t));
        }
    }
    FlowTrajectory {
        family: p.family,
        samples,
        events,
        max_drift: 0.0,
        rel_tol: opts.rel_tol,
    }
}

/// Integrate from `p` at `t = 0` backward to `opts.t0` and forward to
/// `opts.t1`, stopping each leg at its first event.
pub fn integrate(p: &FamilyPoint<f64>, opts: &IntegrateOptions) -> Result<FlowTrajectory> {
    p.validate()?;
    validate_options(opts)?;
    if !p.mu.is_finite() || !p.rho.is_finite() {
        return Err(Error::InvalidOption(format!(
            "non-finite initial point ({}, {})",
            p.mu, p.rho
        )));
    }
    if !(p.rho > opts.rho_floor) {
        return Err(Error::InvalidOption(format!(
            "rho {} is not above the extinction floor {}",
            p.rho, opts.rho_floor
        )));
    }
    if near_fixed_point(p.family, p.mu).is_some() {
        return Ok(ray_trajectory(p, opts));
    }

    let mut events = Vec::new();
    let mut points: Vec<(f64, f64, f64)> = Vec::new();

    if opts.t0 < 0.0 {
        let leg = run_leg(&backward_leg(p, opts.t0), opts)?;
        points.extend(leg.points.iter().rev());
        events.extend(leg.event);
    } else {
        points.push((0.0, p.mu, p.rho));
    }

    if opts.t1 != Horizon::Time(0.0) {
        let mut start = (0.0, p.mu, p.rho);
        let mut done = false;
        if p.family == Family::Canonical && p.mu >= 3.0 {
            // dρ/dt ≥ 0 until μ drops below 3.
            let leg = run_leg(
                &LegRun {
                    setup: LegSetup {
                        family: p.family,
                        chart: Chart::Time,
                        shift: 0.0,
                    },
                    start,
                    x_end: match opts.t1 {
                        Horizon::Time(t) => t,
                        Horizon::End => f64::MAX,
                    },
                    end_event: None,
                    horizon: None,
                    switch_below: Some(CANONICAL_SWITCH),
                },
                opts,
            )?;
            start = *leg.points.last().expect("non-empty leg");
            points.extend(leg.points.iter().skip(1));
            events.extend(leg.event);
            done = !leg.switched;
        }
        if !done {
            let leg = run_leg(&forward_leg(p.family, start, opts), opts)?;
            points.extend(leg.points.iter().skip(1));
            events.extend(leg.event);
        }
    }

    let c0 = invariant(p)?;
    let mut max_drift: f64 = 0.0;
    let mut samples = Vec::with_capacity(points.len());
    for (t, mu, rho) in points {
        // Near extinction t saturates at float resolution; keep the latest
        // state so the trajectory ends on the event.
        while samples.last().is_some_and(|s: &Sample| s.t >= t) {
            samples.pop();
        }
        let c = invariant(&FamilyPoint::new(p.family, mu, rho)).unwrap_or(f64::NAN);
        max_drift = max_drift.max(((c - c0) / c0).abs());
        samples.push(Sample {
            t,
            mu,
            rho,
            invariant: c,
        });
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(FlowTrajectory {
        family: p.family,
        samples,
        events,
        max_drift,
        rel_tol: opts.rel_tol,
    })
}

/// Forward time of extinction (or of the terminal parameter blow-up);
/// exact `ρ0/|dρ/dt|` on a fixed ray.
pub fn extinction_time(p: &FamilyPoint<f64>, rel_tol: f64) -> Result<f64> {
    p.validate()?;
    if near_fixed_point(p.family, p.mu).is_some() {
        let (_, slope) = raw_rhs(p.family, p.mu, p.rho);
        return Ok(p.rho / -slope);
    }
    let traj = integrate(
        p,
        &IntegrateOptions {
            rel_tol,
            ..IntegrateOptions::default()
        },
    )?;
    match traj.forward_event() {
        Some(e) => Ok(e.t),
        None => {
            let last = traj.samples.last().expect("trajectory has samples");
            Err(Error::StepUnderflow {
                t: last.t,
                mu: last.mu,
                rho: last.rho,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Classification

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackwardLimits {
    pub mu: String,
    pub rho: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForwardLimits {
    pub mu: String,
    pub rho: String,
    pub rho_mu: String,
}

/// Numerical end states backing the recorded limits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericEnds {
    pub backward: Sample,
    pub backward_event: Option<EventKind>,
    pub forward: Sample,
    pub forward_event: Option<EventKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationRecord {
    pub family: Family,
    pub mu0: f64,
    pub regime: String,
    pub ancient: bool,
    pub backward: BackwardLimits,
    pub forward: ForwardLimits,
    pub descriptor: String,
    pub numeric: NumericEnds,
}

/// Backward end of the numerical run behind [`classify`].
pub const CLASSIFY_BACKWARD_T: f64 = -10.0;

struct Limits {
    regime: &'static str,
    ancient: bool,
    backward: [&'static str; 2],
    forward: [&'static str; 3],
    descriptor: &'static str,
}

fn limits(family: Family, mu0: f64) -> Limits {
    use std::cmp::Ordering::*;
    let cmp = |m: f64| mu0.partial_cmp(&m).expect("mu0 is a finite positive number");
    match family {
        Family::Cy => match cmp(1.0) {
            Equal => Limits {
                regime: "ke-ray",
                ancient: true,
                backward: ["1", "inf"],
                forward: ["1", "0", "0"],
                descriptor: "homothetic shrinking of the Kähler–Einstein metric",
            },
            Less => Limits {
                regime: "fiber-collapse",
                ancient: true,
                backward: ["1", "inf"],
                forward: ["0", "0", "0"],
                descriptor: "base-metric limit after rho-normalization",
            },
            Greater => Limits {
                regime: "base-first-collapse",
                ancient: true,
                backward: ["1", "inf"],
                forward: ["inf", "0", "0"],
                descriptor: "sub-Riemannian/horizontal limit",
            },
        },
        Family::Canonical => match (cmp(0.5), cmp(1.0)) {
            (Less, _) => Limits {
                regime: "below-half",
                ancient: true,
                backward: ["1/2", "inf"],
                forward: ["0", "finite", "0"],
                descriptor: "fiber collapses in finite time at positive scale",
            },
            (Equal, _) => Limits {
                regime: "half-ray",
                ancient: true,
                backward: ["1/2", "inf"],
                forward: ["1/2", "0", "0"],
                descriptor: "homothetic shrinking along the mu = 1/2 ray",
            },
            (Greater, Less) => Limits {
                regime: "between-fixed-points",
                ancient: true,
                backward: ["1/2", "inf"],
                forward: ["1", "0", "0"],
                descriptor: "mu increases toward 1 while shrinking to a point",
            },
            (_, Equal) => Limits {
                regime: "ke-ray",
                ancient: true,
                backward: ["1", "inf"],
                forward: ["1", "0", "0"],
                descriptor: "homothetic shrinking of the Kähler–Einstein metric",
            },
            (_, Greater) => Limits {
                regime: "above-one",
                ancient: false,
                backward: ["inf", "0"],
                forward: ["1", "0", "0"],
                descriptor: "mu decreases toward 1 forward; fiber blows up in finite backward time",
            },
        },
    }
}

/// Regime and asymptotics of the trajectory through `(μ0, ρ = 1)`, with the
/// numerical end states of a run over `[−10, extinction]`.
pub fn classify(family: Family, mu0: f64) -> Result<ClassificationRecord> {
    let p = FamilyPoint::new(family, mu0, 1.0);
    p.validate()?;
    if !mu0.is_finite() {
        return Err(Error::NonPositiveParameter {
            name: "mu",
            value: mu0.to_string(),
        });
    }
    let traj = integrate(
        &p,
        &IntegrateOptions {
            t0: CLASSIFY_BACKWARD_T,
            ..IntegrateOptions::default()
        },
    )?;
    let l = limits(family, mu0);
    Ok(ClassificationRecord {
        family,
        mu0,
        regime: l.regime.to_string(),
        ancient: l.ancient,
        backward: BackwardLimits {
            mu: l.backward[0].to_string(),
            rho: l.backward[1].to_string(),
        },
        forward: ForwardLimits {
            mu: l.forward[0].to_string(),
            rho: l.forward[1].to_string(),
            rho_mu: l.forward[2].to_string(),
        },
        descriptor: l.descriptor.to_string(),
        numeric: NumericEnds {
            backward: traj.samples[0],
            backward_event: traj.backward_event().map(|e| e.kind),
            forward: *traj.samples.last().expect("trajectory has samples"),
            forward_event: traj.forward_event().map(|e| e.kind),
        },
    })
}

// ---------------------------------------------------------------------------
// Asymptotic soliton

/// Required backward reach of a trajectory handed to [`soliton_check`].
pub const SOLITON_MIN_SPAN: f64 = -5.0;
/// Relative tolerance on the fitted tail exponent `−1/4`.
pub const SOLITON_EXPONENT_TOLERANCE: f64 = 0.15;

/// Least-squares slope of `y` against `x`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Backward approach to the Kähler–Einstein homothety: `|μ − 1|` shrinks
/// monotonically as `t` decreases, `dρ/dt` moves toward `−16`, and
/// `log|μ − 1|` decays like `−¼ log ρ`, the rate forced by the invariant.
pub fn soliton_check(traj: &FlowTrajectory) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    let first = traj.samples.first().ok_or(Error::InsufficientSpan(0.0))?;
    let t_min = first.t;
    if t_min > SOLITON_MIN_SPAN && traj.backward_event().is_none() {
        return Err(Error::InsufficientSpan(t_min));
    }
    let initial = *traj.initial().ok_or(Error::InsufficientSpan(t_min))?;

    report.check(
        "soliton.family",
        traj.family == Family::Cy,
        traj.family,
        Family::Cy,
        match traj.family {
            Family::Cy => "",
            Family::Canonical => "the canonical flow approaches its fixed points forward in time, not backward",
        },
    );

    let backward: Vec<&Sample> = traj.samples.iter().filter(|s| s.t <= 0.0).collect();
    if backward.iter().all(|s| (s.mu - 1.0).abs() < RAY_TOLERANCE) {
        for id in ["soliton.monotone", "soliton.drho", "soliton.tail_exponent"] {
            report.check(id, true, "mu = 1", "mu = 1", "on the Kähler–Einstein ray");
        }
        return Ok(report);
    }

    // Samples are in increasing t, so |μ − 1| must increase along them.
    let dev: Vec<f64> = backward.iter().map(|s| (s.mu - 1.0).abs()).collect();
    let monotone = dev.windows(2).all(|w| w[0] < w[1]);
    report.check(
        "soliton.monotone",
        monotone,
        format!(
            "|mu-1| from {:?} (t = {t_min}) to {:?} (t = 0)",
            dev[0],
            dev[dev.len() - 1]
        ),
        "strictly decreasing as t decreases",
        "",
    );

    let drho = |s: &Sample| raw_rhs(traj.family, s.mu, s.rho).1;
    let (gap_min, gap_0) = ((drho(first) + 16.0).abs(), (drho(&initial) + 16.0).abs());
    report.check(
        "soliton.drho",
        gap_min < gap_0,
        format!("|drho/dt + 16| = {gap_min:?} at t_min"),
        format!("< {gap_0:?} (value at t = 0)"),
        "",
    );

    let tail: Vec<&&Sample> = backward.iter().filter(|s| s.t <= 0.5 * t_min).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = tail
        .iter()
        .filter(|s| s.mu != 1.0)
        .map(|s| (s.rho.ln(), (s.mu - 1.0).abs().ln()))
        .unzip();
    let fitted = if xs.len() >= 2 { slope(&xs, &ys) } else { f64::NAN };
    report.check(
        "soliton.tail_exponent",
        (fitted + 0.25).abs() <= SOLITON_EXPONENT_TOLERANCE * 0.25,
        format!("{fitted:.6}"),
        format!("-0.25 ± {:.0}%", SOLITON_EXPONENT_TOLERANCE * 100.0),
        format!(
            "least-squares slope of log|mu-1| against log rho over t <= {}",
            0.5 * t_min
        ),
    );
    Ok(report)
}

// ---------------------------------------------------------------------------
// Report

/// Reproducible positive rationals `n/d` with `n ∈ [1, 400)`, `d ∈ [1, 97)`.
pub fn sample_rationals(seed: u64, count: usize) -> Vec<BigRational> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| rational(rng.gen_range(1..400), rng.gen_range(1..97)))
        .collect()
}

/// Number of exact sample points used by the identity checks.
pub const IDENTITY_SAMPLES: usize = 20;

/// `dρ/dt = −2·horizontal` and `d(ρμ)/dt = −2·vertical` against the Ricci
/// coefficients computed by the curvature engine, at `μ` from `mus`.
pub fn ricci_consistency(mus: &[BigRational]) -> Result<(usize, usize)> {
    let rho = rational(1, 1);
    let minus_two = rational(-2, 1);
    let (mut horizontal_ok, mut vertical_ok) = (0, 0);
    for mu in mus {
        let (vertical, horizontal) = metric_ricci_coefficients(mu)?;
        let (dmu, drho) = flow_rhs(&FamilyPoint::new(Family::Cy, mu.clone(), rho.clone()))?;
        horizontal_ok += usize::from(drho == &minus_two * &horizontal);
        vertical_ok += usize::from(&drho * mu + &rho * &dmu == &minus_two * &vertical);
    }
    Ok((horizontal_ok, vertical_ok))
}

/// Exact checks of `dμ/dt·∂ln C/∂μ + dρ/dt·∂ln C/∂ρ = 0`; points on a
/// fixed ray are skipped.
pub fn orthogonality_holds(family: Family, mus: &[BigRational], rhos: &[BigRational]) -> Result<(usize, usize)> {
    let (mut ok, mut total) = (0, 0);
    for (mu, rho) in mus.iter().zip(rhos) {
        let p = FamilyPoint::new(family, mu.clone(), rho.clone());
        let Ok((gm, gr)) = invariant_log_gradient(&p) else {
            continue;
        };
        let (dm, dr) = flow_rhs(&p)?;
        total += 1;
        ok += usize::from((dm * gm + dr * gr) == BigRational::from_integer(0.into()));
    }
    Ok((ok, total))
}

fn fraction(ok: usize, total: usize) -> String {
    format!("{ok}/{total}")
}

/// Flow checks: cross-consistency with the curvature engine, conservation,
/// the Kähler–Einstein ray, the asymptotic soliton and the classification.
pub fn flow_report() -> VerificationReport {
    let mut report = VerificationReport::new();

    let mus = sample_rationals(12, IDENTITY_SAMPLES);
    match ricci_consistency(&mus) {
        Ok((h, v)) => {
            let n = mus.len();
            report.check(
                "flow.ricci_consistency.drho",
                h == n,
                fraction(h, n),
                fraction(n, n),
                "dρ/dt = −2·horizontal Ricci coefficient",
            );
            report.check(
                "flow.ricci_consistency.drhomu",
                v == n,
                fraction(v, n),
                fraction(n, n),
                "d(ρμ)/dt = −2·vertical Ricci coefficient",
            );
        }
        Err(e) => report.check("flow.ricci_consistency", false, e, "", ""),
    }

    for family in Family::ALL {
        let mus: Vec<_> = sample_rationals(31, IDENTITY_SAMPLES)
            .into_iter()
            .map(|m| m / rational(40, 1))
            .collect();
        let rhos = sample_rationals(32, IDENTITY_SAMPLES);
        match orthogonality_holds(family, &mus, &rhos) {
            Ok((ok, total)) => report.check(
                format!("flow.orthogonality.{family}"),
                ok == total && total > 0,
                fraction(ok, total),
                fraction(total, total),
                "flow field tangent to the level sets of the invariant",
            ),
            Err(e) => report.check(format!("flow.orthogonality.{family}"), false, e, "", ""),
        }
        let fixed_ok = family.fixed_points_exact().into_iter().all(|m| {
            flow_rhs(&FamilyPoint::new(family, m, rational(1, 1))).is_ok_and(|(dmu, _)| dmu == rational(0, 1))
        });
        report.check(format!("flow.fixed_rays.{family}"), fixed_ok, "", "dμ/dt = 0", "");
    }

    let runs = [
        ("flow.invariant.drift.to_mu3", 1.5, Some(3.0), EventKind::MuLevel),
        ("flow.invariant.drift.to_extinction", 0.25, None, EventKind::Extinction),
    ];
    for (id, mu, stop_at_mu, kind) in runs {
        let opts = IntegrateOptions {
            stop_at_mu,
            ..IntegrateOptions::default()
        };
        match integrate(&FamilyPoint::new(Family::Cy, mu, 1.0), &opts) {
            Ok(traj) => {
                let ended = traj.forward_event().map(|e| e.kind);
                report.check(
                    id,
                    traj.max_drift < 1e-8 && ended == Some(kind),
                    format!(
                        "drift {:.3e}, event {}",
                        traj.max_drift,
                        ended.map_or("none", EventKind::name)
                    ),
                    format!("drift < 1e-8, event {}", kind.name()),
                    format!("Chow–Yang run from ({mu}, 1)"),
                );
            }
            Err(e) => report.check(id, false, e, "", ""),
        }
    }

    ke_ray_checks(&mut report);

    let backward = integrate(
        &FamilyPoint::new(Family::Cy, 2.0, 1.0),
        &IntegrateOptions {
            t0: SOLITON_MIN_SPAN,
            t1: Horizon::Time(0.0),
            ..IntegrateOptions::default()
        },
    );
    match backward.and_then(|t| soliton_check(&t)) {
        Ok(r) => {
            for mut rec in r.records {
                rec.check_id = format!("flow.{}", rec.check_id);
                report.push(rec);
            }
        }
        Err(e) => report.check("flow.soliton", false, e, "", ""),
    }

    for mu0 in [0.25, 4.0] {
        classification_checks(&mut report, mu0);
    }
    report
}

fn ke_ray_checks(report: &mut VerificationReport) {
    let opts = IntegrateOptions {
        t1: Horizon::Time(0.0624),
        ..IntegrateOptions::default()
    };
    match integrate(&FamilyPoint::new(Family::Cy, 1.0, 1.0), &opts) {
        Ok(traj) => {
            let mu_err = traj.samples.iter().map(|s| (s.mu - 1.0).abs()).fold(0.0, f64::max);
            let rho_err = traj
                .samples
                .iter()
                .map(|s| (s.rho - (1.0 - 16.0 * s.t)).abs())
                .fold(0.0, f64::max);
            report.check(
                "flow.ke.ray",
                mu_err < 1e-12 && rho_err < 1e-9,
                format!("max|mu-1| = {mu_err:.1e}, max|rho-(1-16t)| = {rho_err:.1e}"),
                "< 1e-12, < 1e-9",
                "",
            );
        }
        Err(e) => report.check("flow.ke.ray", false, e, "", ""),
    }
    let t1 = extinction_time(&FamilyPoint::new(Family::Cy, 1.0, 1.0), 1e-10);
    let t2 = extinction_time(&FamilyPoint::new(Family::Cy, 1.0, 2.0), 1e-10);
    let ok = matches!((&t1, &t2), (Ok(a), Ok(b)) if *a == 1.0 / 16.0 && *b == 1.0 / 8.0);
    report.check(
        "flow.ke.extinction",
        ok,
        format!("{t1:?}, {t2:?}"),
        "T = rho0/16 (0.0625, 0.125)",
        "",
    );
    report.compare(
        "flow.ke.printed_extinction",
        t1.as_ref().is_ok_and(|t| *t == 1.0 / 8.0),
        "T = 1/16, rho(t) = 1 - 16t",
        "T = 1/8, rho(t) = 1 - 8t",
        "the typeset value matches dρ/dt = −8, i.e. ∂g/∂t = −Ric",
    );
}

/// Backward reach and forward limits of the Chow–Yang classification.
fn classification_checks(report: &mut VerificationReport, mu0: f64) {
    let id = format!("flow.classify.cy.{mu0}");
    let r = match classify(Family::Cy, mu0) {
        Ok(r) => r,
        Err(e) => {
            report.check(id, false, e, "", "");
            return;
        }
    };
    let b = r.numeric.backward;
    report.check(
        format!("{id}.backward_mu"),
        (b.mu - 1.0).abs() < 0.05,
        format!("|mu(-10) - 1| = {:.6}", (b.mu - 1.0).abs()),
        "< 0.05",
        "with rho(0) = 1 the invariant gives |mu - 1| ~ rho^(-1/4)",
    );
    report.check(
        format!("{id}.backward_rho"),
        b.rho > 100.0,
        format!("rho(-10) = {:.3}", b.rho),
        "> 100",
        "",
    );
    let f = r.numeric.forward;
    let limits_ok = r.numeric.forward_event == Some(EventKind::Extinction)
        && f.rho * f.mu < 1e-6
        && if mu0 < 1.0 { f.mu < 1e-6 } else { f.mu > 1e3 };
    report.check(
        format!("{id}.forward"),
        limits_ok && r.ancient,
        format!(
            "mu -> {}, rho -> {}, rho*mu -> {} (end mu = {:.3e}, rho = {:.3e})",
            r.forward.mu, r.forward.rho, r.forward.rho_mu, f.mu, f.rho
        ),
        if mu0 < 1.0 {
            "mu -> 0, rho -> 0"
        } else {
            "mu -> inf, rho -> 0, rho*mu -> 0"
        },
        "",
    );
}

#[cfg(test)]
mod tests;
