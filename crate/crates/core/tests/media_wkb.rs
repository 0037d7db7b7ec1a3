use std::f64::consts::PI;

use approx::assert_relative_eq;
use wkbwave::spectral::discretize_h2;
use wkbwave::wkb::{e_field_wkb, psi_wkb, validity_functional};
use wkbwave::{
    AxisGrid, Boundary, DispersionFactor, Error, FrequencyWindow, MediumModel, PhaseTable, ProfileFactor, Units,
};

fn model(eps1: DispersionFactor, eps2: ProfileFactor) -> MediumModel {
    MediumModel::new(
        eps1,
        DispersionFactor::Constant(1.0),
        eps2,
        ProfileFactor::Constant(1.0),
    )
}

fn cauchy_unit() -> DispersionFactor {
    DispersionFactor::cauchy(1.0, 1.0).unwrap()
}

fn tabulated_cauchy(n: usize, max: f64) -> DispersionFactor {
    let omega: Vec<f64> = (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect();
    let values = omega.iter().map(|w| 1.0 + w * w).collect();
    DispersionFactor::tabulated(omega, values).unwrap()
}

fn lorentzian(a: f64, gamma: f64) -> MediumModel {
    model(
        DispersionFactor::Constant(1.0),
        ProfileFactor::lorentzian(1.0, a, gamma).unwrap(),
    )
}

/// Adaptive 7/15-point Gauss–Kronrod integration.
#[allow(clippy::excessive_precision)]
fn gauss_kronrod<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, tol: f64) -> f64 {
    const XK: [f64; 8] = [
        0.991455371120812639,
        0.949107912342758525,
        0.864864423359769073,
        0.741531185599394440,
        0.586087235467691130,
        0.405845151377397167,
        0.207784955007898468,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022935322010529225,
        0.063092092629978553,
        0.104790010322250184,
        0.140653259715525919,
        0.169004726639267903,
        0.190350578064785410,
        0.204432940075298892,
        0.209482141084727828,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693,
        0.279705391489276668,
        0.381830050505118945,
        0.417959183673469388,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = WK[7] * g(c);
    let mut gauss = WG[3] * g(c);
    for j in 0..7 {
        let pair = g(c - h * XK[j]) + g(c + h * XK[j]);
        kronrod += WK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let (kronrod, gauss) = (kronrod * h, gauss * h);
    if (kronrod - gauss).abs() <= tol || h.abs() < 1e-6 {
        kronrod
    } else {
        gauss_kronrod(g, a, c, 0.5 * tol) + gauss_kronrod(g, c, b, 0.5 * tol)
    }
}

#[test]
fn refractive_index_presets() {
    let vacuum = MediumModel::vacuum(Units::default());
    for omega in [0.1, 1.0, 7.5] {
        assert_eq!(vacuum.n1(omega).unwrap(), 1.0);
    }
    let cauchy = model(cauchy_unit(), ProfileFactor::Constant(1.0));
    assert_relative_eq!(cauchy.n1(1.0).unwrap(), 2f64.sqrt(), max_relative = 1e-15);

    let tabulated = model(tabulated_cauchy(1001, 10.0), ProfileFactor::Constant(1.0))
        .with_window(FrequencyWindow::new(0.0, 10.0).unwrap());
    assert!((tabulated.n1(0.5).unwrap() - 1.25f64.sqrt()).abs() < 1e-6);
}

#[test]
fn dispersion_map_and_slope() {
    let vacuum = MediumModel::vacuum(Units::default());
    assert_eq!(vacuum.f_and_derivative(3.0).unwrap(), (3.0, 1.0));

    let cauchy = model(cauchy_unit(), ProfileFactor::Constant(1.0));
    let (f, df) = cauchy.f_and_derivative(1.0).unwrap();
    assert_relative_eq!(f, 2f64.sqrt(), max_relative = 1e-15);
    assert_relative_eq!(df, 2f64.sqrt() + 1.0 / 2f64.sqrt(), max_relative = 1e-15);

    let tabulated = model(tabulated_cauchy(1001, 10.0), ProfileFactor::Constant(1.0))
        .with_window(FrequencyWindow::new(0.0, 10.0).unwrap());
    let (ft, dft) = tabulated.f_and_derivative(1.0).unwrap();
    assert!((ft - f).abs() < 1e-5);
    assert!((dft - df).abs() < 1e-5);
    let h = 1e-4;
    let fd = (tabulated.f(1.0 + h).unwrap() - tabulated.f(1.0 - h).unwrap()) / (2.0 * h);
    assert!((fd - dft).abs() < 1e-5);
}

#[test]
fn monotonicity_presets_pass() {
    let cauchy = model(cauchy_unit(), ProfileFactor::Constant(1.0));
    cauchy.validate_monotone(0.1, 10.0, 100).unwrap();
    let constant = model(DispersionFactor::constant(2.5).unwrap(), ProfileFactor::Constant(1.0));
    constant.validate_monotone(1e-3, 1e3, 1000).unwrap();
}

#[test]
fn dispersion_dip_is_rejected_near_its_location() {
    let omega: Vec<f64> = (0..2001).map(|i| 4.0 * i as f64 / 2000.0).collect();
    let eps = |w: f64| 1.0 + 3.0 * (-((w - 2.0) / 0.1).powi(2)).exp();
    let values = omega.iter().map(|w| eps(*w)).collect();
    let dipped = model(
        DispersionFactor::tabulated(omega, values).unwrap(),
        ProfileFactor::Constant(1.0),
    )
    .with_window(FrequencyWindow::new(0.0, 4.0).unwrap());

    let err = dipped.validate_monotone(0.1, 3.9, 4001).unwrap_err();
    let Error::NonMonotone { omega: at, slope } = err else {
        panic!("expected NonMonotone, got {err:?}")
    };
    assert!(slope <= 0.0);
    assert!((at - 2.0).abs() < 0.2, "reported at ω = {at}");

    let exact_f = |w: f64| w * eps(w).sqrt();
    let h = 1e-4;
    let slope_at = |w: f64| (exact_f(w + h) - exact_f(w - h)) / (2.0 * h);
    assert!(slope_at(at) < 0.0);
    assert!(slope_at(at - 0.1) > 0.0 || slope_at(1.8) > 0.0);
}

#[test]
fn dispersion_factors_are_even_and_f_is_odd() {
    let factors = [DispersionFactor::constant(1.7).unwrap(), cauchy_unit()];
    for d in &factors {
        for w in [0.3, 1.0, 4.2] {
            assert_eq!(d.value(-w), d.value(w));
            assert_eq!(d.derivative(-w), -d.derivative(w));
        }
    }
    let tabulated = tabulated_cauchy(1001, 10.0);
    for w in [0.35, 2.0, 9.1] {
        assert!((tabulated.value(-w) - tabulated.value(w)).abs() < 1e-12);
    }
    let m = model(cauchy_unit(), ProfileFactor::Constant(1.0));
    for w in [0.5, 1.0, 3.0] {
        assert_eq!(m.f(-w).unwrap(), -m.f(w).unwrap());
    }
}

#[test]
fn homogeneous_phase_is_linear() {
    let m = model(DispersionFactor::Constant(1.0), ProfileFactor::Constant(4.0));
    let table = PhaseTable::build(&m, &AxisGrid::new(-1.0, 1.0, 201).unwrap()).unwrap();
    for (i, z) in table.points().iter().enumerate() {
        assert_eq!(table.v2[i], 0.5);
        assert_relative_eq!(table.u2[i], 2.0 * z, epsilon = 1e-15);
    }
}

#[test]
fn lorentzian_phase_matches_adaptive_quadrature() {
    let m = lorentzian(1.0, 1.0);
    let grid = AxisGrid::new(-5.0, 5.0, 401).unwrap();
    let table = PhaseTable::build(&m, &grid).unwrap();
    let integrand = |s: f64| (1.0 + 1.0 / (1.0 + s * s)).sqrt();
    for (i, z) in table.points().iter().enumerate().step_by(20) {
        let oracle = gauss_kronrod(&integrand, 0.0, *z, 1e-13);
        assert!(
            (table.u2[i] - oracle).abs() < 1e-8,
            "z = {z}: {} vs {oracle}",
            table.u2[i]
        );
    }
}

#[test]
fn phase_origin_is_exact_at_zero() {
    let m = lorentzian(0.7, 2.0);
    let table = PhaseTable::build(&m, &AxisGrid::new(-3.0, 3.0, 301).unwrap()).unwrap();
    assert_eq!(table.points()[table.origin], 0.0);
    assert_eq!(table.u2[table.origin], 0.0);
}

#[test]
fn phase_gradient_is_f_over_v2() {
    let m = model(cauchy_unit(), ProfileFactor::lorentzian(1.0, 0.5, 2.0).unwrap());
    let grid = AxisGrid::new(-6.0, 6.0, 1201).unwrap();
    let table = PhaseTable::build(&m, &grid).unwrap();
    let omega = 1.3;
    let f = m.f(omega).unwrap();
    let psi = psi_wkb(&m, &table, omega).unwrap();
    let mut phase: Vec<f64> = psi.values.iter().map(|v| v.arg()).collect();
    for i in 1..phase.len() {
        while phase[i] - phase[i - 1] > PI {
            phase[i] -= 2.0 * PI;
        }
        while phase[i] - phase[i - 1] < -PI {
            phase[i] += 2.0 * PI;
        }
    }
    let dz = grid.spacing();
    for i in (1..phase.len() - 1).step_by(7) {
        let gradient = (phase[i + 1] - phase[i - 1]) / (2.0 * dz);
        let expected = f / table.v2[i];
        assert!(((gradient - expected) / expected).abs() < 1e-4, "i = {i}");
        let du = (table.u2[i + 1] - table.u2[i - 1]) / (2.0 * dz);
        assert!((du * table.v2[i] - 1.0).abs() < 1e-4);
    }
}

#[test]
fn eigenfunction_examples() {
    let vacuum = MediumModel::vacuum(Units::default());
    let table = PhaseTable::build(&vacuum, &AxisGrid::new(0.0, PI, 201).unwrap()).unwrap();
    let psi = psi_wkb(&vacuum, &table, 2.0).unwrap();
    let mid = psi.values[100];
    assert!((mid.re + (0.5 / PI).sqrt()).abs() < 1e-12 && mid.im.abs() < 1e-12);
    assert_relative_eq!((0.5 / PI).sqrt(), 0.398942280401432, max_relative = 1e-14);

    let slow = model(DispersionFactor::Constant(1.0), ProfileFactor::Constant(4.0));
    let table = PhaseTable::build(&slow, &AxisGrid::new(0.0, 2.0, 201).unwrap()).unwrap();
    let psi = psi_wkb(&slow, &table, 1.0).unwrap();
    let expected = num_complex::Complex64::from_polar((1.0 / PI).sqrt(), 2.0);
    assert!((psi.values[100] - expected).norm() < 1e-12);

    let dispersive = model(cauchy_unit(), ProfileFactor::Constant(1.0));
    let table = PhaseTable::build(&dispersive, &AxisGrid::new(-1.0, 1.0, 201).unwrap()).unwrap();
    let psi = psi_wkb(&dispersive, &table, 1.0).unwrap();
    let h = 1e-5;
    let df = (dispersive.f(1.0 + h).unwrap() - dispersive.f(1.0 - h).unwrap()) / (2.0 * h);
    let oracle = (df / (2.0 * PI)).sqrt();
    assert!((psi.values[100].re - oracle).abs() < 1e-8 && psi.values[100].im == 0.0);
    assert!((oracle - 0.5810496).abs() < 1e-7);

    let table = PhaseTable::build(&vacuum, &AxisGrid::new(-1.0, 1.0, 201).unwrap()).unwrap();
    let e = e_field_wkb(&vacuum, &table, 1.0, 0.0).unwrap();
    assert!((e.values[100].re - (0.5 / PI).sqrt()).abs() < 1e-15);
}

#[test]
fn homogeneous_validity_is_infinite_margin() {
    let m = model(cauchy_unit(), ProfileFactor::Constant(2.0));
    let report = validity_functional(&m, &AxisGrid::new(-3.0, 3.0, 101).unwrap()).unwrap();
    assert!(report.lhs.iter().all(|v| *v == 0.0));
    assert_eq!(report.margin_at(1.0), f64::INFINITY);
}

#[test]
fn lorentzian_validity_matches_closed_form() {
    let (a, gamma) = (0.2, 5.0);
    let grid = AxisGrid::new(-20.0, 20.0, 4001).unwrap();
    let report = validity_functional(&lorentzian(a, gamma), &grid).unwrap();
    // With g = ε₂ and v = g^{-1/2}: (2vv″ − v′²)/(2v²) = (5/8)(g′/g)² − g″/(2g).
    let lhs = |z: f64| {
        let x = z / gamma;
        let d = 1.0 + x * x;
        let g = 1.0 + a / d;
        let g1 = -2.0 * a * x / (gamma * d * d);
        let g2 = a * (6.0 * x * x - 2.0) / (gamma * gamma * d * d * d);
        (0.625 * (g1 / g).powi(2) - 0.5 * g2 / g).abs() / (2.0 * g)
    };
    let oracle = grid.points().into_iter().map(lhs).fold(0.0, f64::max);
    assert_relative_eq!(report.max_lhs, oracle, max_relative = 1e-6);
    for (i, z) in grid.points().iter().enumerate().step_by(97) {
        assert_relative_eq!(report.lhs[i], lhs(*z), max_relative = 1e-9, epsilon = 1e-18);
    }
}

#[test]
fn wkb_residual_falls_as_margin_grows() {
    let omega = 2.0;
    let grid = AxisGrid::new(-40.0, 40.0, 8001).unwrap();
    let mut previous: Option<(f64, f64)> = None;
    for gamma in [1.0, 2.0, 4.0, 8.0] {
        let m = lorentzian(0.5, gamma);
        let margin = validity_functional(&m, &grid).unwrap().margin_at(omega);
        let table = PhaseTable::build(&m, &grid).unwrap();
        let psi = psi_wkb(&m, &table, omega).unwrap();
        let op = discretize_h2(&m, &grid, Boundary::Dirichlet).unwrap();
        let interior = &psi.values[1..grid.len() - 1];
        let re: Vec<f64> = interior.iter().map(|v| v.re).collect();
        let im: Vec<f64> = interior.iter().map(|v| v.im).collect();
        let (hre, him) = (op.apply(&re), op.apply(&im));
        let (mut num, mut den) = (0.0, 0.0);
        let skip = 200;
        for i in skip..interior.len() - skip {
            num += (hre[i] - omega * omega * re[i]).powi(2) + (him[i] - omega * omega * im[i]).powi(2);
            den += (omega * omega).powi(2) * (re[i] * re[i] + im[i] * im[i]);
        }
        let residual = (num / den).sqrt();
        if let Some((prev_margin, prev_residual)) = previous {
            assert!(margin > prev_margin);
            assert!(residual < prev_residual, "γ = {gamma}: {residual} ≥ {prev_residual}");
        }
        assert!(
            residual * margin < 10.0,
            "γ = {gamma}: residual {residual}, margin {margin}"
        );
        previous = Some((margin, residual));
    }
}

#[test]
fn coarse_tabulated_profile_has_no_second_derivatives() {
    let z: Vec<f64> = (0..9).map(|i| -4.0 + i as f64).collect();
    let values = z.iter().map(|z| 1.0 + 0.1 / (1.0 + z * z)).collect();
    let m = model(
        DispersionFactor::Constant(1.0),
        ProfileFactor::tabulated(z, values).unwrap(),
    );
    let err = validity_functional(&m, &AxisGrid::new(-4.0, 4.0, 81).unwrap()).unwrap_err();
    assert!(matches!(err, Error::DerivativeUnavailable(_)));
}
