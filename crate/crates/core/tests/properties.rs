use mcvd::analytic::{
    cumulative_fraction, cumulative_fraction_receptors, effective_boundary, perfect_cumulative_fraction,
    signal_series, ChannelGeometry, Medium, ReceptorSpec,
};
use mcvd::design::{find_n_alpha, DesignQuery, EvalTime};
use mcvd::sim::{place_receptors, resolve_boundary, vec3, BoundaryOutcome, ReflectionRule};
use proptest::prelude::*;

fn geometry() -> impl Strategy<Value = (ChannelGeometry, Medium)> {
    (5.0..20.0f64, 0.5..10.0f64, 10.0..200.0f64)
        .prop_map(|(rr, gap, d)| (ChannelGeometry::with_gap(rr, gap).unwrap(), Medium::new(d).unwrap()))
}

fn outside_point(rr: f64) -> impl Strategy<Value = Vec<f64>> {
    (
        0.0..std::f64::consts::PI,
        0.0..std::f64::consts::TAU,
        0.0..1.0f64,
    )
        .prop_map(move |(theta, phi, h)| {
            let r = rr * (1.0 + h * h * 0.2);
            vec![r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()]
        })
}

proptest! {
    #[test]
    fn huge_receptor_count_approaches_perfect((g, m) in geometry(), t in 0.01..10.0f64) {
        let spec = ReceptorSpec::new(g.receiver_radius * 1e-3, 1_000_000_000).unwrap();
        let f = cumulative_fraction_receptors(&g, &m, &spec, t);
        prop_assert!((f - perfect_cumulative_fraction(&g, &m, t)).abs() <= 1e-3);
    }

    #[test]
    fn direct_and_composed_routes_agree((g, m) in geometry(), n in 1u64..200_000, t in 1e-3..100.0f64) {
        let spec = ReceptorSpec::new(g.receiver_radius / 500.0, n).unwrap();
        let direct = cumulative_fraction_receptors(&g, &m, &spec, t);
        let composed = cumulative_fraction(&g, &m, &effective_boundary(&spec, &g, &m), t);
        prop_assert!((direct - composed).abs() <= 1e-12);
        prop_assert!((0.0..=g.receiver_radius / g.emitter_distance).contains(&direct));
    }

    #[test]
    fn signal_counts_telescope((g, m) in geometry(), n in 1u64..50_000, bins in 1usize..400) {
        let spec = ReceptorSpec::new(0.02, n).unwrap();
        let t_end = 0.5;
        let s = signal_series(10_000, &g, &m, &spec, t_end, t_end / bins as f64).unwrap();
        prop_assert!(s.counts.iter().all(|&c| c >= 0.0));
        let expected = 10_000.0 * cumulative_fraction_receptors(&g, &m, &spec, t_end);
        prop_assert!((s.total() - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    #[test]
    fn design_result_is_minimal(alpha in 0.05..0.7f64, rs in 0.002..0.05f64) {
        let q = DesignQuery {
            alpha,
            geometry: ChannelGeometry::new(11.0, 10.0).unwrap(),
            medium: Medium::new(79.4).unwrap(),
            receptor_radius: rs,
            time: EvalTime::Finite(0.2),
        };
        let r = find_n_alpha(&q).unwrap();
        prop_assert!(r.achieved_fraction >= alpha);
        prop_assert!(r.n_alpha == 0 || q.fraction(r.n_alpha - 1) < alpha);
    }

    #[test]
    fn positions_never_end_inside(
        prev in outside_point(10.0),
        step in proptest::collection::vec(-2.0..2.0f64, 3),
        n in 0usize..2000,
        rollback in any::<bool>(),
    ) {
        let layout = place_receptors(n, 0.01).unwrap();
        let rule = if rollback { ReflectionRule::Rollback } else { ReflectionRule::Specular };
        let p = [prev[0], prev[1], prev[2]];
        let next = vec3::add(p, [step[0], step[1], step[2]]);
        match resolve_boundary(p, next, &layout, 10.0, rule).unwrap() {
            BoundaryOutcome::Free => prop_assert!(vec3::norm(next) >= 10.0 - 1e-9),
            BoundaryOutcome::Reflected { position } => prop_assert!(vec3::norm(position) >= 10.0 - 1e-9),
            BoundaryOutcome::Absorbed { fraction, point, receptor } => {
                prop_assert!((0.0..=1.0).contains(&fraction));
                prop_assert!((vec3::norm(point) - 10.0).abs() < 1e-9);
                prop_assert_eq!(layout.covering_patch(vec3::normalize(point)), Some(receptor));
            }
        }
    }

    #[test]
    fn layout_index_matches_scan(n in 1usize..3000, theta in 1e-4..0.3f64, z in -1.0..1.0f64, phi in 0.0..std::f64::consts::TAU) {
        let layout = place_receptors(n, theta).unwrap();
        let s = (1.0 - z * z).sqrt();
        let u = [s * phi.cos(), s * phi.sin(), z];
        prop_assert_eq!(layout.nearest(u).map(|x| x.0), layout.nearest_brute_force(u).map(|x| x.0));
        prop_assert_eq!(layout.covering_patch(u), layout.covering_patch_brute_force(u));
    }
}
