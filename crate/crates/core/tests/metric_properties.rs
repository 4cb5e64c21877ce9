use crisis_mt_core::metrics::{bleu_corpus, chrf, edit_distance, ter, BleuConfig, ChrfConfig, Components};
use proptest::prelude::*;

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["an", "cat", "Dia", "dhuit", "lámha", "baile", "?", "19", "COVID"]), 4..10)
        .prop_map(|words| words.join(" "))
}

fn corpus() -> impl Strategy<Value = Vec<(String, String)>> {
    prop::collection::vec((sentence(), sentence()), 1..8)
}

proptest! {
    #[test]
    fn identity(h in prop::collection::vec(sentence(), 1..10)) {
        prop_assert_eq!(bleu_corpus(&h, &h, &BleuConfig::default()).unwrap().value, 100.0);
        prop_assert_eq!(ter(&h, &h, false).unwrap().value, 0.0);
        prop_assert_eq!(chrf(&h, &h, &ChrfConfig::default()).unwrap().value, 1.0);
    }

    #[test]
    fn joint_permutation_invariance(pairs in corpus(), rotate in 0usize..8) {
        let (h, r): (Vec<String>, Vec<String>) = pairs.iter().cloned().unzip();
        let mut permuted = pairs.clone();
        permuted.rotate_left(rotate % pairs.len());
        permuted.reverse();
        let (hp, rp): (Vec<String>, Vec<String>) = permuted.into_iter().unzip();
        prop_assert_eq!(
            bleu_corpus(&h, &r, &BleuConfig::default()).unwrap().value,
            bleu_corpus(&hp, &rp, &BleuConfig::default()).unwrap().value
        );
        prop_assert_eq!(ter(&h, &r, false).unwrap().value, ter(&hp, &rp, false).unwrap().value);
        prop_assert_eq!(
            chrf(&h, &r, &ChrfConfig::default()).unwrap().value,
            chrf(&hp, &rp, &ChrfConfig::default()).unwrap().value
        );
    }

    #[test]
    fn bleu_ignores_hypothesis_case(pairs in corpus()) {
        let (h, r): (Vec<String>, Vec<String>) = pairs.into_iter().unzip();
        let upper: Vec<String> = h.iter().map(|s| s.to_uppercase()).collect();
        prop_assert_eq!(
            bleu_corpus(&h, &r, &BleuConfig::default()).unwrap(),
            bleu_corpus(&upper, &r, &BleuConfig::default()).unwrap()
        );
    }

    #[test]
    fn ter_bounded_by_plain_distance(pairs in corpus()) {
        let (h, r): (Vec<String>, Vec<String>) = pairs.into_iter().unzip();
        let mut plain = 0;
        let mut ref_len = 0;
        for (hyp, reference) in h.iter().zip(&r) {
            let hw: Vec<&str> = hyp.split_whitespace().collect();
            let rw: Vec<&str> = reference.split_whitespace().collect();
            let seg = ter(&[hyp], &[reference], false).unwrap().value;
            prop_assert!(seg <= edit_distance(&hw, &rw) as f64 / rw.len() as f64 + 1e-12);
            plain += edit_distance(&hw, &rw);
            ref_len += rw.len();
        }
        prop_assert!(ter(&h, &r, false).unwrap().value <= plain as f64 / ref_len as f64 + 1e-12);
    }

    #[test]
    fn chrf_swap_exchanges_precision_and_recall(pairs in corpus()) {
        let (h, r): (Vec<String>, Vec<String>) = pairs.into_iter().unzip();
        let forward = chrf(&h, &r, &ChrfConfig::default()).unwrap();
        let backward = chrf(&r, &h, &ChrfConfig::default()).unwrap();
        let (Components::Chrf { chr_p: p1, chr_r: r1, precisions: ps1, recalls: rs1, .. },
             Components::Chrf { chr_p: p2, chr_r: r2, precisions: ps2, recalls: rs2, .. }) =
            (forward.components, backward.components) else { unreachable!() };
        prop_assert_eq!(p1, r2);
        prop_assert_eq!(r1, p2);
        prop_assert_eq!(ps1, rs2);
        prop_assert_eq!(rs1, ps2);
    }

    #[test]
    fn ranges_and_purity(pairs in corpus()) {
        let (h, r): (Vec<String>, Vec<String>) = pairs.into_iter().unzip();
        let b = bleu_corpus(&h, &r, &BleuConfig::default()).unwrap();
        let c = chrf(&h, &r, &ChrfConfig::default()).unwrap();
        let t = ter(&h, &r, true).unwrap();
        prop_assert!((0.0..=100.0).contains(&b.value));
        prop_assert!((0.0..=1.0).contains(&c.value));
        prop_assert!(t.value >= 0.0);
        prop_assert_eq!(b.value.to_bits(), bleu_corpus(&h, &r, &BleuConfig::default()).unwrap().value.to_bits());
        prop_assert_eq!(c.value.to_bits(), chrf(&h, &r, &ChrfConfig::default()).unwrap().value.to_bits());
        prop_assert_eq!(t.value.to_bits(), ter(&h, &r, true).unwrap().value.to_bits());
    }
}
