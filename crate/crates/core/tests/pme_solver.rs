use pme_lab::analytic::BarenblattParams;
use pme_lab::initial_data::*;
use pme_lab::pme_solver::*;
use pme_lab::{PmeError, PmeParams};

fn planar() -> PmeParams {
    PmeParams::planar(2.0, 1.0).unwrap()
}

fn barenblatt_datum(a: f64, t: f64) -> (BarenblattParams, InitialDatum) {
    let bp = BarenblattParams::new(a, 2.0, 2).unwrap();
    let r = bp.radius(t);
    (bp, InitialDatum::new(planar(), Rect::new(-r, r, -r, r), DatumSource::Barenblatt { params: bp, t }))
}

fn square(n: usize, half: f64) -> Grid2D {
    Grid2D::new(n, n, 2.0 * half / (n - 1) as f64, -half, -half).unwrap()
}

#[test]
fn zero_datum_stays_zero() {
    let d = InitialDatum::zero(planar(), Rect::new(-1.0, 1.0, -1.0, 1.0));
    let tr = evolve(&d, &square(33, 1.5), 1.0, &SolverConfig::default()).unwrap();
    assert_eq!(tr.steps, tr.len() - 1);
    for k in 0..tr.len() {
        assert!(tr.pressure(k).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn barenblatt_error_and_mass() {
    let t0 = 0.25;
    let (bp, d) = barenblatt_datum(0.25, t0);
    let g = square(65, 1.5);
    let cfg = SolverConfig { mass_every_step: true, ..SolverConfig::default() }.with_output(OutputSchedule::Uniform { count: 8 });
    let tr = evolve(&d, &g, t0, &cfg).unwrap();
    let mut err: f64 = 0.0;
    for k in 1..tr.len() {
        let t = t0 + tr.snapshots[k].t;
        let top = bp.eval(&[0.0, 0.0], t).unwrap();
        for (node, v) in tr.pressure(k).into_iter().enumerate() {
            let (x, y) = g.point(node);
            err = err.max((v - bp.eval(&[x, y], t).unwrap()).abs() / top);
        }
    }
    assert!(err < 0.02, "{err}");
    assert!(tr.mass.relative_drift() <= 1e-8, "{:?}", tr.mass.max_drift);
    assert!(tr.mass.samples.len() > tr.steps);
    assert!((tr.mass.initial - tr.base.iter().sum::<f64>() * g.h * g.h).abs() < 1e-12);
}

#[test]
fn traveling_wave_front_moves_with_unit_speed() {
    let rect = Rect::new(-1.0, 1.0, 0.0, 0.5);
    let g = Grid2D::on_rect(&rect, 81).unwrap();
    let d = InitialDatum::new(planar(), Rect::new(-1.0, 0.0, 0.0, 0.5), DatumSource::TravelingWave { speed: 1.0, t: 0.0 });
    let cfg = SolverConfig { boundary: BoundaryCondition::Prescribed(ExactSolution::TravelingWave { speed: 1.0, t0: 0.0 }), ..SolverConfig::default() }
        .with_output(OutputSchedule::Uniform { count: 5 });
    let tr = evolve(&d, &g, 0.5, &cfg).unwrap();
    let j = g.ny / 2;
    for k in 0..tr.len() {
        let p = tr.pressure(k);
        let row: Vec<f64> = (0..g.nx).map(|i| p[g.index(i, j)]).collect();
        let eps = tr.eps_pos;
        let i = row.iter().rposition(|&v| v > eps).unwrap();
        let front = g.x(i) + g.h * (row[i] - eps) / (row[i] - row[i + 1]);
        let t = tr.snapshots[k].t;
        assert!((front - t).abs() < 2.0 * g.h, "t {t}: front {front}");
    }
}

#[test]
fn radial_barenblatt() {
    let bp = BarenblattParams::new(0.25, 2.0, 2).unwrap();
    let t0 = 0.25;
    let grid = RadialGrid::new(4096, 1.5, 2).unwrap();
    let cfg = SolverConfig { mass_every_step: true, ..SolverConfig::default() }.with_output(OutputSchedule::Uniform { count: 2 });
    let dt_total = 0.005;
    let tr = evolve_radial(|r| bp.eval(&[r, 0.0], t0).unwrap(), 2.0, &grid, dt_total, &cfg).unwrap();
    let t = t0 + dt_total;
    let top = bp.eval(&[0.0, 0.0], t).unwrap();
    let err = tr.pressure(tr.times.len() - 1).iter().enumerate().map(|(i, v)| (v - bp.eval(&[grid.center(i), 0.0], t).unwrap()).abs()).fold(0.0, f64::max) / top;
    assert!(err <= 0.01, "{err}");
    assert!(tr.mass.relative_drift() <= 1e-8);
    assert!(bp.radius(t) - bp.radius(t0) > 5.0 * grid.dr);
}

#[test]
fn radial_zero() {
    let grid = RadialGrid::new(64, 1.0, 2).unwrap();
    let tr = evolve_radial(|_| 0.0, 2.0, &grid, 1.0, &SolverConfig::default()).unwrap();
    assert!(tr.densities.iter().flatten().all(|&u| u == 0.0));
}

#[test]
fn ordered_barenblatt_pair() {
    let (_, a) = barenblatt_datum(0.25, 0.25);
    let (_, b) = barenblatt_datum(0.5, 0.25);
    let g = square(49, 2.0);
    let r = comparison_check(&a, &b, &g, 0.1, &SolverConfig::default(), 1e-10).unwrap();
    assert!(r.passes && r.min_gap >= -1e-10, "{r:?}");
    let same = comparison_check(&a, &a, &g, 0.1, &SolverConfig::default(), 1e-10).unwrap();
    assert_eq!(same.min_gap, 0.0);
}

#[test]
fn interior_datum_plus_bump_stays_above() {
    let a = build_interior_datum(&PmeParams::planar(2.0, 1.0).unwrap()).unwrap();
    let DatumSource::Interior(c) = &a.source else { panic!() };
    let rho = c.rho;
    let top = a.pressure(0.0, 0.0);
    let b = InitialDatum::new(
        a.params,
        a.support,
        DatumSource::Sum(vec![a.source.clone(), DatumSource::Bump { center: [0.3 * rho, 0.0], radius: 0.5 * rho, height: 0.2 * top }]),
    );
    let g = Grid2D::covering(&a.support, 0.25, 49).unwrap();
    let t = 0.05 * (rho * rho) / top;
    let r = comparison_check(&a, &b, &g, t, &SolverConfig::default(), 1e-10).unwrap();
    assert!(r.passes, "{r:?}");
    assert!(r.steps > 10);
}

#[test]
fn oversized_step_is_reported() {
    let (_, d) = barenblatt_datum(0.25, 0.25);
    let g = square(33, 1.5);
    let mut st = Stepper::new(&d, &g, &SolverConfig::default()).unwrap();
    let dt = 50.0 * st.stable_dt();
    let mut failed = false;
    for _ in 0..20 {
        if let Err(e) = st.step(dt) {
            assert!(matches!(e, PmeError::Instability(_)));
            failed = true;
            break;
        }
    }
    assert!(failed);
}

#[test]
fn config_validation() {
    let bad = SolverConfig { sigma: 0.95, ..SolverConfig::default() };
    assert!(bad.validate().is_err());
    let bad = SolverConfig { eps_pos: Some(-1.0), ..SolverConfig::default() };
    assert!(bad.validate().is_err());
    assert!(OutputSchedule::Times { times: vec![0.2, 0.1] }.times(1.0).is_err());
    let cfg: SolverConfig = toml::from_str("sigma = 0.4\n[output]\nkind = \"uniform\"\ncount = 3\n").unwrap();
    assert_eq!(cfg.output, OutputSchedule::Uniform { count: 3 });
    assert!(toml::from_str::<SolverConfig>("sigmaa = 0.4").is_err());
}

#[test]
fn exports_round_trip() {
    let (_, d) = barenblatt_datum(0.25, 0.25);
    let g = square(17, 1.5);
    let tr = evolve(&d, &g, 0.01, &SolverConfig::default().with_output(OutputSchedule::Uniform { count: 2 })).unwrap();
    let mut bin = Vec::new();
    tr.write_binary(&mut bin).unwrap();
    let (g2, m, fields) = read_binary(bin.as_slice()).unwrap();
    assert_eq!((g2, m, fields.len()), (g, 2.0, 3));
    assert_eq!(fields[2].1, tr.pressure(2));
    let mut csv = Vec::new();
    tr.write_csv(1, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("x,y,v\n"));
    assert_eq!(text.lines().count(), g.len() + 1);
}
