use std::io::Write;
use std::sync::Arc;

use shocklens::approx::{u_app, ApproxConfig};
use shocklens::data::{builtin_datum, normalize_gauge, Translated};
use shocklens::experiment::resolve_datum;
use shocklens::viscous::reference_colehopf;

#[test]
fn boosted_and_shifted_datum_lands_in_the_same_frame() {
    let base = resolve_datum("gaussian-odd").unwrap();
    let moved = normalize_gauge(Arc::new(Translated {
        inner: builtin_datum("gaussian-odd").unwrap(),
        shift: 0.7,
        offset: 0.3,
    }))
    .unwrap();
    assert!((moved.t0() - base.t0()).abs() < 1e-12);
    assert!((moved.x_crit() - 0.7).abs() < 1e-10 && (moved.u_crit() - 0.3).abs() < 1e-12);
    let cfg = ApproxConfig::new(1e-3, 0).unwrap();
    for &(t, x) in &[(-0.5, 0.2), (-0.05, -0.1), (-1e-3, 1e-3)] {
        let a = reference_colehopf(&base, 1e-3, t, x, 1e-12).unwrap();
        let b = reference_colehopf(&moved, 1e-3, t, x, 1e-12).unwrap();
        assert!((a - b).abs() < 1e-9, "({t}, {x}): {a} vs {b}");
        let a = u_app(&cfg, &base, t, x).unwrap();
        let b = u_app(&cfg, &moved, t, x).unwrap();
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn tabulated_datum_reproduces_the_closed_form_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("odd.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "x,u").unwrap();
    for i in 0..=1600 {
        let x = -8.0 + 0.01 * i as f64;
        writeln!(f, "{x},{}", -x * (-x * x).exp()).unwrap();
    }
    drop(f);
    let table = resolve_datum(path.to_str().unwrap()).unwrap();
    let exact = resolve_datum("gaussian-odd").unwrap();
    assert!((table.t0() - exact.t0()).abs() < 1e-6, "{}", table.t0());
    assert!((table.beta3() - exact.beta3()).abs() < 1e-3, "{}", table.beta3());
    for &(t, x) in &[(-0.5, 0.2), (-0.1, -0.05)] {
        let a = reference_colehopf(&table, 1e-3, t, x, 1e-10).unwrap();
        let b = reference_colehopf(&exact, 1e-3, t, x, 1e-10).unwrap();
        assert!((a - b).abs() < 1e-5, "({t}, {x}): {a} vs {b}");
    }
}
