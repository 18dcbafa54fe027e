//! Fixtures shared by the benchmarks.

use texmetric_core::dataio::{synth_corpus, SynthSpec};
use texmetric_core::{
    build_filter_bank, generate_triplets, signal_features, FeatureVector, FilterBank,
    FilterBankConfig, IntegrationMode, Signal, Triplet,
};

pub fn default_bank() -> FilterBank {
    build_filter_bank(FilterBankConfig::default()).expect("default config is valid")
}

/// One second at 10 kHz per recording.
pub fn corpus(n_classes: usize, samples_per_class: usize) -> Vec<(String, Signal)> {
    let spec = SynthSpec {
        n_classes,
        samples_per_class,
        ..SynthSpec::default()
    };
    synth_corpus(&spec).expect("valid spec").entries().to_vec()
}

pub fn features(n_classes: usize, samples_per_class: usize) -> Vec<FeatureVector> {
    let bank = default_bank();
    corpus(n_classes, samples_per_class)
        .into_iter()
        .map(|(label, s)| {
            signal_features(&s, &bank, IntegrationMode::Full)
                .expect("synthetic signals are valid")
                .with_label(label)
        })
        .collect()
}

pub fn triplets(features: &[FeatureVector]) -> Vec<Triplet> {
    generate_triplets(features, 1, 0).expect("at least two classes of two")
}
