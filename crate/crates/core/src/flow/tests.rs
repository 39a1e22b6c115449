use super::*;
use crate::report::Status;
use num::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn q(n: i64, d: i64) -> BigRational {
    rational(n, d)
}

fn exact(family: Family, mu: BigRational, rho: BigRational) -> FamilyPoint<BigRational> {
    FamilyPoint::new(family, mu, rho)
}

fn random_rational(rng: &mut StdRng) -> BigRational {
    q(rng.gen_range(1..400), rng.gen_range(1..97))
}

#[test]
fn ricci_map_examples() {
    let r = ricci_map(&exact(Family::Cy, q(1, 1), q(7, 1))).unwrap();
    assert_eq!((r.mu, r.rho), (q(1, 1), q(8, 1)));
    let r = ricci_map(&exact(Family::Cy, q(1, 2), q(1, 1))).unwrap();
    assert_eq!((r.mu, r.rho), (q(3, 5), q(10, 1)));
    let r = ricci_map(&exact(Family::Canonical, q(1, 1), q(1, 1))).unwrap();
    assert_eq!((r.mu, r.rho), (q(1, 1), q(8, 1)));
}

#[test]
fn ricci_map_errors() {
    assert!(matches!(
        ricci_map(&exact(Family::Canonical, q(3, 1), q(1, 1))),
        Err(Error::RicciNotPositive(_))
    ));
    assert!(matches!(
        ricci_map(&exact(Family::Cy, q(0, 1), q(1, 1))),
        Err(Error::NonPositiveParameter { name: "mu", .. })
    ));
    assert!(matches!(
        ricci_map(&FamilyPoint::new(Family::Cy, 1.0, -1.0)),
        Err(Error::NonPositiveParameter { name: "rho", .. })
    ));
}

#[test]
fn ricci_map_is_scale_invariant() {
    let mut rng = StdRng::seed_from_u64(7);
    for family in Family::ALL {
        for _ in 0..20 {
            let mu = random_rational(&mut rng) / q(150, 1);
            let a = ricci_map(&exact(family, mu.clone(), random_rational(&mut rng)));
            let b = ricci_map(&exact(family, mu.clone(), random_rational(&mut rng)));
            match (a, b) {
                (Ok(a), Ok(b)) => assert_eq!(a, b),
                (Err(_), Err(_)) => assert!(mu >= q(3, 1)),
                _ => panic!("inconsistent result at mu = {mu}"),
            }
        }
    }
}

#[test]
fn flow_rhs_examples() {
    assert_eq!(
        flow_rhs(&exact(Family::Cy, q(1, 1), q(1, 1))).unwrap(),
        (q(0, 1), q(-16, 1))
    );
    assert_eq!(
        flow_rhs(&exact(Family::Cy, q(4, 1), q(2, 1))).unwrap(),
        (q(6, 1), q(-13, 1))
    );
    for rho in [q(1, 3), q(5, 1)] {
        assert_eq!(
            flow_rhs(&exact(Family::Canonical, q(1, 1), rho)).unwrap(),
            (q(0, 1), q(-16, 1))
        );
    }
    assert_eq!(flow_rhs(&FamilyPoint::new(Family::Cy, 4.0, 2.0)).unwrap(), (6.0, -13.0));
}

#[test]
fn fixed_rays_and_signs() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let mu = random_rational(&mut rng) / q(50, 1);
        let (dmu, _) = flow_rhs(&exact(Family::Cy, mu.clone(), q(1, 1))).unwrap();
        assert_eq!(dmu.is_zero(), mu.is_one());
        assert_eq!(dmu > q(0, 1), mu > q(1, 1));
    }
    for family in Family::ALL {
        for m in family.fixed_points_exact() {
            assert!(flow_rhs(&exact(family, m, q(2, 1))).unwrap().0.is_zero());
        }
    }
    // Canonical: μ increases on (1/2, 1) only.
    let (dmu, _) = flow_rhs(&exact(Family::Canonical, q(3, 4), q(1, 1))).unwrap();
    assert!(dmu > q(0, 1));
    let (dmu, _) = flow_rhs(&exact(Family::Canonical, q(1, 4), q(1, 1))).unwrap();
    assert!(dmu < q(0, 1));
}

#[test]
fn invariant_examples() {
    assert_eq!(cy_invariant_exact(&q(4, 1), &q(81, 1)).unwrap(), q(6561, 4));
    assert_eq!(invariant(&FamilyPoint::new(Family::Cy, 4.0, 81.0)).unwrap(), 1640.25);
    assert!(matches!(
        invariant(&FamilyPoint::new(Family::Cy, 1.0, 2.0)),
        Err(Error::OnFixedRay(_))
    ));
    assert!(matches!(
        invariant(&FamilyPoint::new(Family::Canonical, 0.5, 2.0)),
        Err(Error::OnFixedRay(_))
    ));
    // Canonical: ρ|2μ−1|^{5/2}/(μ−1)² at μ = 5/2, ρ = 1: 4^{5/2}/(9/4) = 128/9.
    let c = invariant(&FamilyPoint::new(Family::Canonical, 2.5, 1.0)).unwrap();
    assert!((c - 128.0 / 9.0).abs() < 1e-13);
}

#[test]
fn flow_is_orthogonal_to_invariant_gradient() {
    let mut rng = StdRng::seed_from_u64(2024);
    for family in Family::ALL {
        let mut checked = 0;
        while checked < 20 {
            let p = exact(family, random_rational(&mut rng) / q(40, 1), random_rational(&mut rng));
            let Ok((gm, gr)) = invariant_log_gradient(&p) else {
                continue;
            };
            let (dm, dr) = flow_rhs(&p).unwrap();
            assert!((dm * gm + dr * gr).is_zero(), "{family} at ({}, {})", p.mu, p.rho);
            checked += 1;
        }
    }
}

#[test]
fn flow_matches_curvature_engine() {
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..20 {
        let mu = random_rational(&mut rng);
        let (vertical, horizontal) = metric_ricci_coefficients(&mu).unwrap();
        let (dmu, drho) = flow_rhs(&exact(Family::Cy, mu.clone(), q(3, 1))).unwrap();
        assert_eq!(drho, q(-2, 1) * &horizontal);
        // d(ρμ)/dt = ρ'μ + ρμ'
        assert_eq!(&drho * &mu + q(3, 1) * dmu, q(-2, 1) * &vertical);
        assert_eq!(vertical, q(4, 1) * (q(1, 1) + &mu));
    }
}

#[test]
fn ke_ray_is_exact() {
    let traj = integrate(
        &FamilyPoint::new(Family::Cy, 1.0, 1.0),
        &IntegrateOptions {
            t1: Horizon::Time(0.0624),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(traj.events[0].kind, EventKind::FixedRay);
    assert!(traj.events.iter().all(|e| e.kind != EventKind::Extinction));
    for s in &traj.samples {
        assert!((s.mu - 1.0).abs() < 1e-12);
        assert!((s.rho - (1.0 - 16.0 * s.t)).abs() < 1e-9);
        assert!(s.invariant.is_nan());
    }
    assert_eq!(traj.samples.last().unwrap().t, 0.0624);
}

#[test]
fn extinction_times() {
    let cy = |mu, rho| FamilyPoint::new(Family::Cy, mu, rho);
    assert_eq!(extinction_time(&cy(1.0, 1.0), 1e-10).unwrap(), 1.0 / 16.0);
    assert_eq!(extinction_time(&cy(1.0, 2.0), 1e-10).unwrap(), 1.0 / 8.0);
    assert_eq!(
        extinction_time(&FamilyPoint::new(Family::Canonical, 0.5, 1.0), 1e-10).unwrap(),
        1.0 / 20.0
    );
    // Reference values: scipy DOP853 at rtol 1e-13 with ρ as independent variable.
    for (mu, t_ref) in [
        (0.5, 0.044270833333333426),
        (0.25, 0.02636718750000003),
        (1.5, 0.06944444444436164),
        (2.0, 0.07291666666658382),
        (4.0, 0.07812499999991718),
    ] {
        let t = extinction_time(&cy(mu, 1.0), 1e-10).unwrap();
        assert!((t - t_ref).abs() < 1e-9, "mu0 = {mu}: {t} vs {t_ref}");
    }
    let t = extinction_time(&FamilyPoint::new(Family::Canonical, 0.75, 1.0), 1e-10).unwrap();
    assert!((t - 0.056903559372822925).abs() < 1e-9);
}

/// Classical RK4 in `s = ln ρ` with a fixed step, independent of the
/// adaptive driver.
fn rk4_extinction(mu0: f64, steps: usize) -> f64 {
    let f = |s: f64, mu: f64| {
        let rho = s.exp();
        (-rho * mu / (4.0 * (1.0 + 3.0 * mu)), mu * (1.0 - mu) / (1.0 + 3.0 * mu))
    };
    let s_end = RHO_FLOOR.ln();
    let h = s_end / steps as f64;
    let (mut s, mut t, mut mu) = (0.0, 0.0, mu0);
    for _ in 0..steps {
        let k1 = f(s, mu);
        let k2 = f(s + h / 2.0, mu + h / 2.0 * k1.1);
        let k3 = f(s + h / 2.0, mu + h / 2.0 * k2.1);
        let k4 = f(s + h, mu + h * k3.1);
        t += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        mu += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        s += h;
    }
    t
}

#[test]
fn extinction_agrees_with_fixed_step_oracle() {
    let t = extinction_time(&FamilyPoint::new(Family::Cy, 0.5, 1.0), 1e-10).unwrap();
    let coarse = rk4_extinction(0.5, 2_000);
    let fine = rk4_extinction(0.5, 20_000);
    assert!((fine - coarse).abs() < 1e-9);
    assert!((t - fine).abs() < 1e-9);
    assert!(t > 0.0 && t < 0.125);
}

#[test]
fn backward_run_from_four() {
    let traj = integrate(
        &FamilyPoint::new(Family::Cy, 4.0, 1.0),
        &IntegrateOptions {
            t0: -10.0,
            t1: Horizon::Time(0.0),
            ..Default::default()
        },
    )
    .unwrap();
    let s = traj.samples[0];
    assert_eq!(s.t, -10.0);
    // Reference: scipy DOP853, rtol 1e-13.
    assert!((s.mu - 1.7022216904985414).abs() < 1e-8, "{}", s.mu);
    assert!((s.rho - 141.7568936213835).abs() < 1e-6);
    assert!(s.mu > 1.0 && s.rho > 100.0);
    assert!(traj.max_drift < 1e-8);
    assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
}

#[test]
fn forward_state_matches_reference() {
    let traj = integrate(
        &FamilyPoint::new(Family::Cy, 1.5, 1.0),
        &IntegrateOptions {
            t1: Horizon::Time(0.05),
            ..Default::default()
        },
    )
    .unwrap();
    let last = traj.samples.last().unwrap();
    assert_eq!(last.t, 0.05);
    assert!((last.mu - 1.7151994653474802).abs() < 1e-8);
    assert!((last.rho - 0.2731458876735016).abs() < 1e-8);
}

#[test]
fn conservation_and_positivity() {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..12 {
        let family = if rng.gen_bool(0.5) {
            Family::Cy
        } else {
            Family::Canonical
        };
        let mu = 10f64.powf(rng.gen_range(-1.5..1.5));
        let rho = 10f64.powf(rng.gen_range(-2.0..2.0));
        let traj = integrate(
            &FamilyPoint::new(family, mu, rho),
            &IntegrateOptions {
                t0: -3.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            traj.max_drift < 1e-8,
            "{family} ({mu}, {rho}): drift {}",
            traj.max_drift
        );
        assert!(traj.samples.iter().all(|s| s.mu > 0.0 && s.rho > 0.0));
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
    }
}

#[test]
fn mu_level_stops_run() {
    let traj = integrate(
        &FamilyPoint::new(Family::Cy, 1.5, 1.0),
        &IntegrateOptions {
            stop_at_mu: Some(3.0),
            ..Default::default()
        },
    )
    .unwrap();
    let e = traj.forward_event().unwrap();
    assert_eq!(e.kind, EventKind::MuLevel);
    assert!((e.mu - 3.0).abs() < 1e-8);
    assert!(traj.max_drift < 1e-8);
}

#[test]
fn canonical_from_above_three_switches_coordinates() {
    let traj = integrate(
        &FamilyPoint::new(Family::Canonical, 5.0, 1.0),
        &IntegrateOptions::default(),
    )
    .unwrap();
    assert_eq!(traj.forward_event().unwrap().kind, EventKind::Extinction);
    assert!(traj.max_drift < 1e-8, "{}", traj.max_drift);
    assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
}

#[test]
fn invalid_options() {
    let p = FamilyPoint::new(Family::Cy, 2.0, 1.0);
    for opts in [
        IntegrateOptions {
            rel_tol: 0.0,
            ..Default::default()
        },
        IntegrateOptions {
            t0: 1.0,
            ..Default::default()
        },
        IntegrateOptions {
            t1: Horizon::Time(-1.0),
            ..Default::default()
        },
    ] {
        assert!(matches!(integrate(&p, &opts), Err(Error::InvalidOption(_))));
    }
}

#[test]
fn classify_cy() {
    let r = classify(Family::Cy, 4.0).unwrap();
    assert_eq!(r.regime, "base-first-collapse");
    assert!(r.ancient);
    assert_eq!(
        (r.forward.mu.as_str(), r.forward.rho.as_str(), r.forward.rho_mu.as_str()),
        ("inf", "0", "0")
    );
    assert_eq!((r.backward.mu.as_str(), r.backward.rho.as_str()), ("1", "inf"));
    assert_eq!(r.numeric.forward_event, Some(EventKind::Extinction));
    assert!(r.numeric.forward.mu > 1e3);
    assert!(r.numeric.forward.mu * r.numeric.forward.rho < 1e-6);

    let r = classify(Family::Cy, 0.25).unwrap();
    assert_eq!(r.regime, "fiber-collapse");
    assert_eq!((r.forward.mu.as_str(), r.forward.rho.as_str()), ("0", "0"));
    assert_eq!((r.backward.mu.as_str(), r.backward.rho.as_str()), ("1", "inf"));
    assert!((r.numeric.backward.mu - 0.7328614397736791).abs() < 1e-8);
    assert!(r.numeric.forward.mu < 1e-10);

    assert_eq!(classify(Family::Cy, 1.0).unwrap().regime, "ke-ray");
    assert!(classify(Family::Cy, -1.0).is_err());
}

#[test]
fn classify_canonical() {
    let r = classify(Family::Canonical, 0.75).unwrap();
    assert_eq!(r.regime, "between-fixed-points");
    assert_eq!(r.forward.mu, "1");
    assert!(r.numeric.forward.mu > 0.75 && r.numeric.forward.mu < 1.0);
    assert!(r.numeric.backward.mu < 0.75 && r.numeric.backward.mu > 0.5);

    let r = classify(Family::Canonical, 0.25).unwrap();
    assert_eq!(r.numeric.forward_event, Some(EventKind::ParameterBlowup));
    assert!(r.numeric.forward.rho > 0.1);

    let r = classify(Family::Canonical, 2.0).unwrap();
    assert!(!r.ancient);
    assert_eq!(r.numeric.backward_event, Some(EventKind::ParameterBlowup));
    assert!(r.numeric.backward.t > -10.0);
}

fn backward(family: Family, mu: f64, t0: f64) -> FlowTrajectory {
    integrate(
        &FamilyPoint::new(family, mu, 1.0),
        &IntegrateOptions {
            t0,
            t1: Horizon::Time(0.0),
            ..Default::default()
        },
    )
    .unwrap()
}

#[test]
fn soliton_passes_for_cy() {
    for mu in [2.0, 4.0, 0.25, 1.0] {
        let report = soliton_check(&backward(Family::Cy, mu, -5.0)).unwrap();
        assert!(report.all_pass(), "mu0 = {mu}: {report:#?}");
    }
}

#[test]
fn soliton_fails_for_canonical() {
    let report = soliton_check(&backward(Family::Canonical, 2.0, -5.0)).unwrap();
    assert_eq!(report.get("soliton.family").unwrap().status, Status::Fail);
    assert!(!report.all_pass());
}

#[test]
fn soliton_needs_span() {
    assert!(matches!(
        soliton_check(&backward(Family::Cy, 2.0, -1.0)),
        Err(Error::InsufficientSpan(t)) if t == -1.0
    ));
}

#[test]
fn family_names_roundtrip() {
    for f in Family::ALL {
        assert_eq!(f.name().parse::<Family>().unwrap(), f);
        assert_eq!(serde_json::to_string(&f).unwrap(), format!("\"{}\"", f.name()));
    }
    assert!("other".parse::<Family>().is_err());
}

#[test]
fn report_lists_only_known_departures() {
    let report = flow_report();
    let off: Vec<(&str, Status)> = report
        .records
        .iter()
        .filter(|r| r.status != Status::Pass)
        .map(|r| (r.check_id.as_str(), r.status))
        .collect();
    assert_eq!(
        off,
        vec![
            ("flow.ke.printed_extinction", Status::Mismatch),
            ("flow.classify.cy.0.25.backward_mu", Status::Fail),
            ("flow.classify.cy.4.backward_mu", Status::Fail),
        ]
    );
    assert!(report.get("flow.ricci_consistency.drhomu").is_some());
}
