use proptest::prelude::*;
use statrs::function::erf::erf;

use texmetric_core::boost::RankOneTerm;
use texmetric_core::eval::{dissimilarity_index, knn_classify};
use texmetric_core::{
    build_filter_bank, dft321_magnitude, extract_features, generate_triplets, train_metric,
    FeatureVector, FilterBankConfig, IntegrationMode, MahalanobisModel, Metric, Signal, Spectrum,
    TrainConfig,
};

fn signal_strategy() -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(prop::array::uniform3(-10.0f64..10.0), 8..96)
}

fn labelled(points: &[Vec<f64>], per_class: usize) -> Vec<FeatureVector> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            FeatureVector::transformed(p.clone(), Some(format!("c{}", i / per_class))).unwrap()
        })
        .collect()
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-3).then(|| v.iter().map(|x| x / n).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectrum_scales_linearly(samples in signal_strategy(), c in 0.1f64..5.0) {
        let a = dft321_magnitude(&Signal::new(samples.clone(), 50.0).unwrap());
        let scaled: Vec<[f64; 3]> = samples.iter().map(|s| s.map(|x| -c * x)).collect();
        let b = dft321_magnitude(&Signal::new(scaled, 50.0).unwrap());
        for (x, y) in a.magnitudes().iter().zip(b.magnitudes()) {
            prop_assert!((c * x - y).abs() <= 1e-9 * (1.0 + c * x));
        }
    }

    #[test]
    fn parseval_over_axes(samples in signal_strategy()) {
        // for even n, bins 1..n/2-1 appear twice in the full DFT
        let n = samples.len();
        let s = dft321_magnitude(&Signal::new(samples.clone(), 50.0).unwrap());
        let m = s.magnitudes();
        let mut full = m[0] * m[0];
        for k in 1..m.len() {
            let twice = !(n % 2 == 0 && k == n / 2);
            full += if twice { 2.0 } else { 1.0 } * m[k] * m[k];
        }
        let time: f64 = samples.iter().flat_map(|s| s.iter()).map(|x| x * x).sum();
        prop_assert!((full / n as f64 - time).abs() <= 1e-9 * time.max(1.0));
    }

    #[test]
    fn features_quadratic_and_bounded(mags in prop::collection::vec(0.0f64..3.0, 101), c in 0.1f64..4.0) {
        let spectrum = Spectrum::new(mags.clone(), 1.0, 100.0).unwrap();
        let scaled = Spectrum::new(mags.iter().map(|m| c * m).collect(), 1.0, 100.0).unwrap();
        let bank = build_filter_bank(FilterBankConfig::new(6, 1.8, 100.0).unwrap()).unwrap();
        let full = extract_features(&spectrum, &bank, IntegrationMode::Full).unwrap();
        let bounded = extract_features(&spectrum, &bank, IntegrationMode::Bounded).unwrap();
        let full_scaled = extract_features(&scaled, &bank, IntegrationMode::Full).unwrap();
        for j in 0..6 {
            let (f, b) = (full.values()[j], bounded.values()[j]);
            prop_assert!(f >= 0.0 && b >= 0.0);
            prop_assert!(b <= f * (1.0 + 1e-12));
            prop_assert!((full_scaled.values()[j] - c * c * f).abs() <= 1e-9 * (1.0 + c * c * f));
        }
    }

    #[test]
    fn knn_ignores_metric_scale(
        points in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 12),
        queries in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 5),
        z in prop::collection::vec(-1.0f64..1.0, 3),
        scale in 0.01f64..100.0,
    ) {
        let Some(direction) = unit(&z) else { return Ok(()); };
        let train = labelled(&points, 4);
        let test = labelled(&queries, 5);
        let m = MahalanobisModel::from_terms(3, vec![
            RankOneTerm { weight: 1.0, direction },
            RankOneTerm { weight: 0.25, direction: vec![0.0, 0.0, 1.0] },
        ]).unwrap();
        let a = knn_classify(&train, &test, 3, &Metric::Learned(m.clone())).unwrap();
        let b = knn_classify(&train, &test, 3, &Metric::Learned(m.scaled(scale).unwrap())).unwrap();
        // scaling by a power of two is exact, so distances compare identically
        let c = knn_classify(&train, &test, 3, &Metric::Learned(m.scaled(8.0).unwrap())).unwrap();
        prop_assert_eq!(&a, &c);
        let disagreements = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        prop_assert!(disagreements <= 1, "{disagreements} predictions changed");
    }

    #[test]
    fn dissimilarity_matches_triple_loop(
        b in prop::collection::vec(prop::collection::vec(-3i32..3, 2), 2..=5),
        c in prop::collection::vec(prop::collection::vec(-3i32..3, 2), 1..=5),
    ) {
        // integer grid points force plenty of distance ties
        let to_f = |v: &Vec<Vec<i32>>| -> Vec<Vec<f64>> {
            v.iter().map(|p| p.iter().map(|&x| x as f64).collect()).collect()
        };
        let (b, c) = (to_f(&b), to_f(&c));
        let metric = Metric::Euclidean;
        let mut hits = 0usize;
        let mut total = 0usize;
        for i in 0..b.len() {
            for j in 0..b.len() {
                if i == j { continue; }
                for k in &c {
                    total += 1;
                    if metric.distance(&b[i], &b[j]).unwrap() < metric.distance(&b[i], k).unwrap() {
                        hits += 1;
                    }
                }
            }
        }
        prop_assert_eq!(dissimilarity_index(&b, &c, &metric).unwrap(), hits as f64 / total as f64);
    }

    #[test]
    fn trained_model_is_psd_and_loss_monotone(
        points in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 4), 9),
        seed in 0u64..1000,
    ) {
        let features = labelled(&points, 3);
        let triplets = generate_triplets(&features, 2, seed).unwrap();
        let config = TrainConfig { max_iterations: 25, rng_seed: seed, ..TrainConfig::default() };
        let model = train_metric(&triplets, &features, config).unwrap();
        let probes: Vec<Vec<f64>> = points.iter().chain(&[vec![1.0, -1.0, 0.5, 2.0]]).cloned().collect();
        prop_assert!(model.check_invariants(&probes).is_ok());
        for w in model.loss_history().windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        for t in model.terms() {
            prop_assert!(t.weight >= 0.0);
        }
    }
}

#[test]
fn flat_spectrum_matches_truncated_gaussian_area() {
    let df = 0.05;
    let f_max = 1000.0;
    let n = (f_max / df) as usize + 1;
    let spectrum = Spectrum::new(vec![1.0; n], df, f_max).unwrap();
    let bank = build_filter_bank(FilterBankConfig::new(11, 1.8, f_max).unwrap()).unwrap();
    let f = extract_features(&spectrum, &bank, IntegrationMode::Full).unwrap();
    for j in 0..11 {
        let (c, s) = (bank.centers()[j], bank.sigmas()[j]);
        let r2 = std::f64::consts::SQRT_2 * s;
        let area = s * (std::f64::consts::PI / 2.0).sqrt() * (erf((f_max - c) / r2) - erf(-c / r2));
        let rel = (f.values()[j] - area).abs() / area;
        assert!(
            rel <= 0.02,
            "bin {}: {} vs {area} ({rel})",
            j + 1,
            f.values()[j]
        );
    }
}

#[test]
fn boosting_separates_axis_aligned_classes() {
    // class depends on the first coordinate only; the second is noise at a
    // much larger scale
    let points: Vec<Vec<f64>> = (0..12)
        .map(|i| {
            let class = (i / 4) as f64;
            vec![
                class + 0.05 * (i % 4) as f64,
                10.0 * ((i * 7 % 5) as f64 - 2.0),
            ]
        })
        .collect();
    let features = labelled(&points, 4);
    let triplets = generate_triplets(&features, 2, 1).unwrap();
    let model = train_metric(
        &triplets,
        &features,
        TrainConfig {
            max_iterations: 100,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    let m = model.matrix();
    assert!(m[(0, 0)] > 10.0 * m[(1, 1)].abs(), "{m}");
    let predicted = knn_classify(&features, &features, 1, &Metric::Learned(model)).unwrap();
    assert!(predicted
        .iter()
        .zip(&features)
        .all(|(p, f)| Some(p.as_str()) == f.label()));
}
