//! Property tests for the library invariants.

use lexatom::corpus::{clean_word_list, normalize_token, LabeledCorpus, Word, WordList};
use lexatom::features::{decode_row, featurize_word, ALPHABET};
use lexatom::learn::smote_oversample_detailed;
use lexatom::stats::{
    bonferroni, select_significant, two_sample_t_test, variable_significance_table, TestKind,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn normalize_is_idempotent_and_well_formed(raw in ".{0,12}") {
        if let Some(word) = normalize_token(&raw) {
            prop_assert!(word.len() >= 2);
            prop_assert!(word.bytes().iter().all(u8::is_ascii_lowercase));
            let again = normalize_token(word.as_str()).unwrap();
            prop_assert_eq!(again, word);
        }
    }

    #[test]
    fn one_hot_invariants_and_decode(text in "[a-z]{2,22}") {
        let word = Word::new(&text).unwrap();
        let lmax = 22;
        let row = featurize_word(&word, lmax).unwrap();
        prop_assert_eq!(row.len(), lmax * ALPHABET);
        for p in 0..lmax {
            let ones = row[p * ALPHABET..(p + 1) * ALPHABET]
                .iter()
                .filter(|&&x| x == 1.0)
                .count();
            prop_assert_eq!(ones, usize::from(p < word.len()), "position {}", p + 1);
        }
        prop_assert_eq!(decode_row(&row, lmax).unwrap(), word);
    }

    #[test]
    fn bonferroni_is_monotone_and_bounded(
        p1 in 0.0f64..=1.0,
        p2 in 0.0f64..=1.0,
        m1 in 1usize..10_000,
        m2 in 1usize..10_000,
    ) {
        let lo_p = p1.min(p2);
        let hi_p = p1.max(p2);
        let lo_m = m1.min(m2);
        let hi_m = m1.max(m2);
        prop_assert!(bonferroni(lo_p, lo_m) <= bonferroni(hi_p, lo_m));
        prop_assert!(bonferroni(lo_p, lo_m) <= bonferroni(lo_p, hi_m));
        prop_assert!((0.0..=1.0).contains(&bonferroni(p1, m1)));
        prop_assert!(bonferroni(p1, m1) >= p1.min(1.0));
    }

    #[test]
    fn t_test_is_antisymmetric(
        x in prop::collection::vec(0u8..2, 2..50),
        y in prop::collection::vec(0u8..2, 2..50),
    ) {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let a = two_sample_t_test(&xf, &yf, TestKind::Welch).unwrap();
        let b = two_sample_t_test(&yf, &xf, TestKind::Welch).unwrap();
        prop_assert_eq!(a.t, -b.t);
        prop_assert_eq!(a.p, b.p);
        prop_assert!((0.0..=1.0).contains(&a.p));
    }

    #[test]
    fn smote_synthetics_fill_exactly_and_stay_in_hull(
        rows in prop::collection::vec(prop::collection::vec(0.0f32..=1.0, 3), 2..8),
        target in 0usize..24,
        seed in 0u64..1000,
    ) {
        let refs: Vec<&[f32]> = rows.iter().map(Vec::as_slice).collect();
        let synth = smote_oversample_detailed(&refs, target, 3, seed).unwrap();
        prop_assert_eq!(synth.len(), target.saturating_sub(rows.len()));
        for s in &synth {
            let (a, b) = s.parents;
            prop_assert!(a != b);
            for (v, (&pa, &pb)) in s.values.iter().zip(rows[a].iter().zip(&rows[b])) {
                prop_assert!(*v >= pa.min(pb) && *v <= pa.max(pb));
            }
        }
    }

    #[test]
    fn clean_word_list_is_idempotent(tokens in prop::collection::vec(".{0,8}", 1..40)) {
        let Ok((once, first)) = clean_word_list("x", &tokens, true) else {
            return Ok(()); // nothing survived; nothing to check
        };
        let raw: Vec<String> = once.words.iter().map(|w| w.to_string()).collect();
        let (twice, second) = clean_word_list("x", &raw, true).unwrap();
        prop_assert_eq!(&once.words, &twice.words);
        prop_assert_eq!(second.total, second.deduped);
        prop_assert!(first.total >= first.cleaned && first.cleaned >= first.deduped);
    }

    #[test]
    fn significant_sets_shrink_with_stricter_filters(
        simple in prop::collection::vec("[a-z]{2,6}", 4..20),
        complex in prop::collection::vec("[a-z]{2,6}", 4..20),
        alpha in 0.0f64..=1.0,
        max_position in 1usize..6,
    ) {
        let (s, _) = clean_word_list("s", &simple, false).unwrap();
        let (c, _) = clean_word_list("c", &complex, false).unwrap();
        prop_assume!(s.len() >= 2 && c.len() >= 2);
        let corpus = LabeledCorpus { simple: s, complex: c };
        let table = variable_significance_table(&corpus, TestKind::Welch).unwrap();
        let base = select_significant(&table, alpha, max_position + 1);
        let tighter_alpha = select_significant(&table, alpha / 2.0, max_position + 1);
        let tighter_pos = select_significant(&table, alpha, max_position);
        prop_assert!(tighter_alpha.len() <= base.len());
        prop_assert!(tighter_pos.len() <= base.len());
        for v in &tighter_pos {
            prop_assert!(base.contains(v));
        }
    }

    #[test]
    fn word_list_max_len_matches(words in prop::collection::vec("[a-z]{2,9}", 1..20)) {
        let (list, _) = clean_word_list("x", &words, false).unwrap();
        let expect = list.iter().map(Word::len).max().unwrap();
        prop_assert_eq!(WordList::new("y", list.words.clone()).max_len(), expect);
    }
}
