use proptest::prelude::*;

use lamb_dipole::diagnostics::estimate_shift;
use lamb_dipole::dipole::DipoleSpec;
use lamb_dipole::grid::{Grid, ScalarField};
use lamb_dipole::io::{decode_snapshot, encode_snapshot, parse_config, SnapshotMeta};
use lamb_dipole::perturbation::{add_bump, PerturbationSpec};
use lamb_dipole::spectral::Spectral;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6, Just(0.0), Just(-0.0), Just(f64::MIN_POSITIVE), Just(f64::MAX)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snapshot_roundtrip(
        log_n in 4u32..7,
        l in 0.5f64..20.0,
        t in 0.0f64..100.0,
        v in -2.0f64..2.0,
        alpha in 0.51f64..=1.0,
        seed in prop::collection::vec(finite(), 1..8),
    ) {
        let n = 1usize << log_n;
        let g = Grid::new(n, l).unwrap();
        let values: Vec<f64> = (0..g.len()).map(|k| seed[k % seed.len()]).collect();
        let field = ScalarField::new(g, values).unwrap();
        let meta = SnapshotMeta { time: t, frame_speed: v, alpha };
        let bytes = encode_snapshot(&field, &meta);
        prop_assert_eq!(bytes.len(), 44 + 8 * n * n);
        let (back, m) = decode_snapshot(&bytes).unwrap();
        prop_assert_eq!(&back.values, &field.values);
        prop_assert_eq!(back.grid, g);
        prop_assert_eq!(m, meta);
        prop_assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn dipole_is_odd_in_x2(x1 in -2.0f64..2.0, x2 in -2.0f64..2.0) {
        let d = DipoleSpec::lamb();
        prop_assert_eq!(d.vorticity_at([x1, -x2]), -d.vorticity_at([x1, x2]));
        let u = d.velocity_at([x1, x2]);
        let v = d.velocity_at([x1, -x2]);
        prop_assert!((u[0] - v[0]).abs() <= 1e-14 * (1.0 + u[0].abs()));
        prop_assert!((u[1] + v[1]).abs() <= 1e-14 * (1.0 + u[1].abs()));
        if x1 * x1 + x2 * x2 > 1.0 {
            prop_assert_eq!(d.vorticity_at([x1, x2]), 0.0);
        }
    }

    #[test]
    fn shell_mass_is_monotone(a in 0.001f64..1.0, b in 0.001f64..1.0) {
        let d = DipoleSpec::lamb();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(d.shell_mass(lo).unwrap() <= d.shell_mass(hi).unwrap());
        prop_assert!(d.shell_mass(lo).unwrap() > 0.0);
    }

    #[test]
    fn bump_keeps_odd_symmetry(
        amp in 0.0f64..5.0,
        c1 in -1.5f64..1.5,
        c2 in 0.5f64..2.0,
        rho in 0.1f64..0.45,
    ) {
        let g = Grid::new(64, 4.0).unwrap();
        let d = DipoleSpec::lamb();
        let base = ScalarField::from_fn(g, |x| d.vorticity_at(x));
        let spec = PerturbationSpec {
            bump_amplitude: amp,
            bump_center: [c1, c2],
            bump_radius: rho,
            ..Default::default()
        };
        let f = add_bump(&base, &spec).unwrap();
        prop_assert!(f.odd_symmetry_residual() < 1e-14);
        let min_upper = g.upper_rows().flat_map(|j| (0..g.n).map(move |i| (i, j))).map(|(i, j)| f.at(i, j)).fold(f64::INFINITY, f64::min);
        prop_assert!(min_upper >= -1e-14);
    }

    #[test]
    fn config_text_roundtrip(
        log_n in 4u32..11,
        l in 1.0f64..20.0,
        dt in prop_oneof![Just(None), (1e-4f64..0.1).prop_map(Some)],
        t_end in 0.0f64..50.0,
        alpha in 0.51f64..=1.0,
        v in -2.0f64..2.0,
        every in 0u32..5,
        nu in 0.0f64..1e-10,
        zero_mean in any::<bool>(),
        amp in 0.0f64..3.0,
    ) {
        let text = format!(
            "n = {}\nL = {l:?}\ndt = {}\nt_end = {t_end:?}\nalpha = {alpha:?}\nframe_speed = {v:?}\n\
             symmetrize_every = {every}\nhyperviscosity_coeff = {nu:?}\nmean_flow = {}\nbump_amplitude = {amp:?}\n",
            1usize << log_n,
            dt.map_or("auto".to_string(), |d: f64| format!("{d:?}")),
            if zero_mean { "zero" } else { "free-space" },
        );
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_text()).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(again.hash(), cfg.hash());
        prop_assert_eq!(cfg.half_extent, Some(l));
        prop_assert_eq!(cfg.alpha, alpha);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn shift_is_translation_equivariant(s in -2.0f64..2.0) {
        let g = Grid::new(128, 8.0).unwrap();
        let d = DipoleSpec::lamb();
        let base = ScalarField::from_fn(g, |x| d.vorticity_at(x));
        let moved = ScalarField::from_fn(g, |x| d.vorticity_at([x[0] - s, x[1]]));
        let t0 = estimate_shift(&base, 0.0).unwrap().tau;
        let t1 = estimate_shift(&moved, s).unwrap().tau;
        prop_assert!((t1 - t0 - s).abs() < 2e-3, "t0 {} t1 {} s {}", t0, t1, s);
    }

    #[test]
    fn odd_data_gives_even_odd_velocity(
        coef in prop::collection::vec(-1.0f64..1.0, 6),
        alpha in 0.55f64..=1.0,
    ) {
        let g = Grid::new(32, 3.0).unwrap();
        let k = std::f64::consts::PI / 3.0;
        let field = ScalarField::from_fn(g, |x| {
            (0..6).map(|m| {
                let (a, b) = ((m % 3) as f64, (m / 3 + 1) as f64);
                coef[m] * (a * k * x[0] + 0.3 * a).cos() * (b * k * x[1]).sin()
            }).sum()
        });
        let mut sp = Spectral::new(g);
        let u = sp.velocity_from_scalar(&field, alpha).unwrap();
        let umax = u.max_magnitude();
        let div = sp.divergence(&u).max_abs();
        prop_assert!(div <= 1e-10 * umax.max(1e-300));
        for j in 0..g.n {
            let jm = g.mirror_row(j);
            for i in 0..g.n {
                let (a, b) = (g.index(i, j), g.index(i, jm));
                prop_assert!((u.u1[a] - u.u1[b]).abs() <= 1e-12 * umax.max(1.0));
                prop_assert!((u.u2[a] + u.u2[b]).abs() <= 1e-12 * umax.max(1.0));
            }
        }
    }
}
