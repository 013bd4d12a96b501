use dwgm::bdmcmc::{edge_probabilities, run_chain, ChainConfig, DataTerm};
use dwgm::graph::moves::{set_entry, update_inverse};
use dwgm::graph::normconst::NormalizingConstants;
use dwgm::graph::wishart::{is_positive_definite, spd_inverse};
use dwgm::graph::{edge_terms, gwishart_sample, GWishartParams, Graph, NormConstMode};
use dwgm::io::{format_count_table, library_size_factors, parse_count_table};
use dwgm::latent::{count_from_latent, latent_interval, truncated_normal_sample};
use dwgm::marginals::{
    continuous_weibull_cdf, hpd_interval, CountDistribution, DwParams, NbParams, ZeroInflated,
};
use dwgm::rng::stream;
use dwgm::sim::mann_whitney_auc;
use dwgm::CountDataset;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn dw() -> impl Strategy<Value = DwParams> {
    (0.02f64..0.98, 0.25f64..5.0).prop_map(|(q, b)| DwParams::new(q, b).unwrap())
}

fn graph(p: usize) -> impl Strategy<Value = Graph> {
    proptest::collection::vec(any::<bool>(), p * (p - 1) / 2).prop_map(move |bits| {
        let mut g = Graph::empty(p);
        let mut k = 0;
        for i in 0..p {
            for j in i + 1..p {
                g.set_edge(i, j, bits[k]);
                k += 1;
            }
        }
        g
    })
}

proptest! {
    #[test]
    fn cdf_is_monotone_and_matches_pmf(d in dw(), y in 0i64..200) {
        prop_assert!(d.cdf(y) >= d.cdf(y - 1));
        prop_assert!((d.cdf(y) - d.cdf(y - 1) - d.pmf(y as u64)).abs() <= 1e-12);
        prop_assert!((d.cdf(y) + d.sf(y) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn discretized_weibull_bridge(d in dw(), y in 0u64..200) {
        let diff = continuous_weibull_cdf((y + 1) as f64, &d) - continuous_weibull_cdf(y as f64, &d);
        prop_assert!((d.pmf(y) - diff).abs() <= 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf(d in dw(), tau in 0.001f64..0.999) {
        let y = d.quantile(tau).unwrap();
        prop_assert!(d.cdf(y as i64) >= tau);
        prop_assert!(d.cdf(y as i64 - 1) < tau);
    }

    #[test]
    fn zero_inflated_pmf_sums_to_one(d in dw(), pi in 0.0f64..1.0) {
        let z = ZeroInflated::new(d, pi).unwrap();
        let top = d.upper_support(1e-13);
        let total: f64 = (0..=top.min(200_000)).map(|y| z.pmf(y)).sum::<f64>() + z.sf(top.min(200_000) as i64);
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!((z.cdf(0) - z.pmf(0)).abs() < 1e-15);
    }

    #[test]
    fn generator_and_interval_are_inverse(d in dw(), pi in 0.0f64..0.6, z in -8.0f64..8.0) {
        let dist = ZeroInflated::new(d, pi).unwrap();
        let y = count_from_latent(z, &dist);
        let iv = latent_interval(y, &dist).unwrap();
        prop_assert!(iv.lo < iv.hi);
        prop_assert!(iv.contains(z), "z={z} y={y} interval=({}, {}]", iv.lo, iv.hi);
    }

    #[test]
    fn negative_binomial_intervals_are_exact(mu in 0.1f64..50.0, phi in 0.05f64..3.0, z in -6.0f64..6.0) {
        let nb = NbParams::new(mu, phi).unwrap();
        let y = count_from_latent(z, &nb);
        prop_assert!(latent_interval(y, &nb).unwrap().contains(z));
    }

    #[test]
    fn truncated_normal_stays_inside(mu in -3.0f64..3.0, sigma in 0.1f64..3.0, lo in -10.0f64..10.0, w in 1e-6f64..5.0, seed in 0u64..1000) {
        let mut rng = stream(seed, 0);
        let hi = lo + w;
        for _ in 0..20 {
            let x = truncated_normal_sample(mu, sigma, lo, hi, &mut rng).unwrap();
            prop_assert!(x > lo && x <= hi, "{x} outside ({lo}, {hi}]");
        }
    }

    #[test]
    fn hpd_holds_the_requested_mass(xs in proptest::collection::vec(-100.0f64..100.0, 1..300), level in 0.05f64..0.99) {
        let (lo, hi) = hpd_interval(&xs, level).unwrap();
        let inside = xs.iter().filter(|&&x| x >= lo && x <= hi).count();
        prop_assert!(lo <= hi);
        prop_assert!(inside >= (level * xs.len() as f64).ceil() as usize);
    }

    #[test]
    fn edge_list_round_trip(g in graph(7)) {
        prop_assert_eq!(Graph::parse_edge_list(7, &g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn count_table_round_trip(rows in proptest::collection::vec(proptest::collection::vec(0u64..100_000, 4), 1..12)) {
        let ds = CountDataset::from_rows(&rows).unwrap();
        prop_assert_eq!(parse_count_table(&format_count_table(&ds), None).unwrap(), ds);
    }

    #[test]
    fn size_factors_are_normalized_and_order_free(
        rows in proptest::collection::vec(proptest::collection::vec(1u64..1000, 5), 2..10),
        shift in 0usize..5,
    ) {
        let ds = CountDataset::from_rows(&rows).unwrap();
        let f = library_size_factors(&ds).unwrap();
        prop_assert!(f.iter().all(|&v| v > 0.0));
        let mean_log = f.iter().map(|v| v.ln()).sum::<f64>() / f.len() as f64;
        prop_assert!(mean_log.abs() < 1e-12);
        let rotated: Vec<Vec<u64>> = rows.iter().map(|r| {
            let mut r = r.clone();
            r.rotate_left(shift);
            r
        }).collect();
        let g = library_size_factors(&CountDataset::from_rows(&rotated).unwrap()).unwrap();
        for (a, b) in f.iter().zip(&g) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn auc_is_antisymmetric(pos in proptest::collection::vec(0.0f64..1.0, 1..30), neg in proptest::collection::vec(0.0f64..1.0, 1..30)) {
        let a = mann_whitney_auc(&pos, &neg).unwrap();
        let b = mann_whitney_auc(&neg, &pos).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gwishart_respects_the_graph(g in graph(6), seed in 0u64..10_000) {
        let mut rng = stream(seed, 0);
        let k = gwishart_sample(&g, &GWishartParams::default_prior(6), &mut rng).unwrap();
        prop_assert!(is_positive_definite(&k));
        for i in 0..6 {
            for j in 0..6 {
                if i != j && !g.has_edge(i, j) {
                    prop_assert!(k[(i, j)].abs() < 1e-8);
                }
                prop_assert_eq!(k[(i, j)], k[(j, i)]);
            }
        }
    }

    #[test]
    fn one_edge_move_keeps_inverse_and_block(g in graph(5), a in 0usize..5, b in 0usize..5, seed in 0u64..10_000) {
        prop_assume!(a != b);
        let mut rng = stream(seed, 1);
        let params = GWishartParams::default_prior(5);
        let mut k = gwishart_sample(&g, &params, &mut rng).unwrap();
        let mut sigma = spd_inverse(&k, "test").unwrap();
        let consts = NormalizingConstants::build(NormConstMode::Approximate, &params, &mut rng).unwrap();
        let terms = edge_terms(&g, &k, &sigma, &params.d, a, b, &consts, 0.5).unwrap();
        let (i, j) = (terms.i, terms.j);
        let schur_before = {
            let s = spd_inverse(&k, "test").unwrap();
            1.0 / s[(j, j)]
        };
        let value = if g.has_edge(i, j) { 0.0 } else { terms.mean + 1.0 / terms.tau.sqrt() };
        let up = set_entry(&mut k, &terms, value);
        update_inverse(&mut sigma, &up);
        let direct = spd_inverse(&k, "test").unwrap();
        prop_assert!((&sigma - &direct).abs().max() < 1e-8 * direct.abs().max().max(1.0));
        prop_assert!((1.0 / direct[(j, j)] - schur_before).abs() < 1e-8 * schur_before.abs().max(1.0));
        prop_assert!(is_positive_definite(&k));
    }

    #[test]
    fn birth_and_death_ratios_cancel(g in graph(5), a in 0usize..5, b in 0usize..5, seed in 0u64..10_000) {
        prop_assume!(a != b);
        let mut rng = stream(seed, 2);
        let params = GWishartParams::default_prior(5);
        let mut k = gwishart_sample(&g, &params, &mut rng).unwrap();
        let sigma = spd_inverse(&k, "test").unwrap();
        let consts = NormalizingConstants::build(NormConstMode::Approximate, &params, &mut rng).unwrap();
        let t = edge_terms(&g, &k, &sigma, &params.d, a, b, &consts, 0.3).unwrap();
        // The toggled graph sees the same conditional terms once the entry is reset.
        let mut h = g.clone();
        h.toggle(t.i, t.j);
        let value = if g.has_edge(t.i, t.j) { 0.0 } else { t.mean };
        let up = set_entry(&mut k, &t, value);
        let mut s2 = sigma.clone();
        update_inverse(&mut s2, &up);
        let t2 = edge_terms(&h, &k, &s2, &params.d, a, b, &consts, 0.3).unwrap();
        prop_assert!((t.log_birth - t2.log_birth).abs() < 1e-8 * t.log_birth.abs().max(1.0));
    }
}

#[test]
fn chains_are_deterministic() {
    let cfg = ChainConfig { iterations: 200, ..Default::default() };
    let mut rng = stream(5, 0);
    let z: Vec<f64> = (0..40 * 4).map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)).collect();
    let data = || DataTerm::Fixed(dwgm::latent::LatentMatrix::from_columns(40, 4, z.clone()).unwrap());
    let a = run_chain(&cfg, data(), 11, 0).unwrap();
    let b = run_chain(&cfg, data(), 11, 0).unwrap();
    assert_eq!(edge_probabilities(&a.accumulator).unwrap(), edge_probabilities(&b.accumulator).unwrap());
    assert_eq!(a.graph_size_trace, b.graph_size_trace);
    let c = run_chain(&cfg, data(), 12, 0).unwrap();
    assert_ne!(a.graph_size_trace, c.graph_size_trace);
}

#[test]
fn edge_probabilities_are_symmetric_in_unit_range() {
    let cfg = ChainConfig { iterations: 300, ..Default::default() };
    let out = run_chain(&cfg, DataTerm::PriorOnly { p: 5 }, 3, 0).unwrap();
    let m: DMatrix<f64> = edge_probabilities(&out.accumulator).unwrap();
    for i in 0..5 {
        assert_eq!(m[(i, i)], 0.0);
        for j in 0..5 {
            assert_eq!(m[(i, j)], m[(j, i)]);
            assert!((0.0..=1.0).contains(&m[(i, j)]));
        }
    }
}
