use nliprobe_core::corpus::Label;
use nliprobe_core::stats::gamma::chi_square_sf;
use nliprobe_core::stats::{
    chi_square_gof, count_word_labels, gof_statistic, top_k_report, ContingencyRow,
    ExpectedProportions, WordType,
};
use nliprobe_core::tagging::Extraction;
use proptest::prelude::*;

fn ext(subject: Option<&str>, verb: Option<&str>) -> Extraction {
    Extraction {
        main_subject: subject.map(String::from),
        main_verb: verb.map(String::from),
    }
}

fn row(word: &str, word_type: WordType, counts: [u64; 3]) -> ContingencyRow {
    ContingencyRow {
        word: word.into(),
        word_type,
        counts,
        total: counts.iter().sum(),
    }
}

#[test]
fn ten_entry_count_golden() {
    use Label::*;
    let entries = vec![
        (ext(Some("man"), Some("sitting")), Entailment),
        (ext(Some("man"), Some("sitting")), Contradiction),
        (ext(Some("woman"), Some("is")), Neutral),
        (ext(Some("man"), None), Contradiction),
        (ext(None, Some("running")), Entailment),
        (ext(Some("people"), Some("are")), Entailment),
        (ext(Some("woman"), Some("sitting")), Contradiction),
        (ext(Some("man"), Some("is")), Neutral),
        (ext(Some("people"), None), Entailment),
        (ext(Some("dog"), Some("running")), Neutral),
    ];
    // Tallied by hand; ties ordered by word.
    let want = vec![
        row("man", WordType::SubjectNoun, [1, 1, 2]),
        row("sitting", WordType::MainVerb, [1, 0, 2]),
        row("is", WordType::MainVerb, [0, 2, 0]),
        row("people", WordType::SubjectNoun, [2, 0, 0]),
        row("running", WordType::MainVerb, [1, 1, 0]),
        row("woman", WordType::SubjectNoun, [0, 1, 1]),
        row("are", WordType::MainVerb, [1, 0, 0]),
        row("dog", WordType::SubjectNoun, [0, 1, 0]),
    ];
    assert_eq!(count_word_labels(&entries), want);
}

#[test]
fn fifty_twenty_five_twenty_five() {
    let t = chi_square_gof([50, 25, 25], &ExpectedProportions::uniform()).unwrap();
    assert!((t.statistic - 12.5).abs() < 1e-12);
    // df = 2 survival function: exp(-12.5 / 2).
    assert!((t.p_value - (-6.25f64).exp()).abs() < 1e-8);
    assert_eq!(format!("{:.4e}", t.p_value), "1.9305e-3");
    assert_eq!(t.df, 2);
}

#[test]
fn exact_fit_gives_p_one() {
    let e = ExpectedProportions::new([0.5, 0.25, 0.25]).unwrap();
    let t = chi_square_gof([40, 20, 20], &e).unwrap();
    assert_eq!(t.statistic, 0.0);
    assert_eq!(t.p_value, 1.0);
}

#[test]
fn report_shape_and_truncation() {
    let rows = vec![
        row("man", WordType::SubjectNoun, [30, 30, 40]),
        row("woman", WordType::SubjectNoun, [20, 20, 20]),
        row("is", WordType::MainVerb, [50, 10, 10]),
    ];
    let r = top_k_report(&rows, &ExpectedProportions::uniform(), 2, 25).unwrap();
    assert_eq!(r.subject_nouns.len(), 2);
    assert_eq!(r.main_verbs.len(), 1);
    assert!(!r.subject_truncated && r.verb_truncated);
    assert_eq!(r.warnings.len(), 1);
    assert_eq!(r.expected.p_value, 1.0);
}

fn counts() -> impl Strategy<Value = [u64; 3]> {
    prop::array::uniform3(0u64..1_000_000).prop_filter("non-empty", |c| c.iter().sum::<u64>() > 0)
}

fn proportions() -> impl Strategy<Value = ExpectedProportions> {
    prop::array::uniform3(1u32..1000).prop_map(|w| {
        let total: f64 = w.iter().map(|&x| x as f64).sum();
        let p0 = w[0] as f64 / total;
        let p1 = w[1] as f64 / total;
        ExpectedProportions::new([p0, p1, 1.0 - p0 - p1]).unwrap()
    })
}

proptest! {
    #[test]
    fn df2_matches_closed_form(c in counts()) {
        let t = chi_square_gof(c, &ExpectedProportions::uniform()).unwrap();
        // Q(1, x/2) = exp(-x/2); compare in log space where p underflows.
        prop_assert!((t.log_p + t.statistic / 2.0).abs() <= 1e-12 * (t.statistic / 2.0).max(1.0));
        let closed = (-t.statistic / 2.0).exp();
        if closed > 1e-300 {
            prop_assert!((t.p_value - closed).abs() <= 1e-12 * closed);
        }
    }

    #[test]
    fn statistic_invariant_under_joint_permutation(c in counts(), e in proportions(), perm in Just([2usize, 0, 1])) {
        let p = e.get();
        let a = gof_statistic(&c, &p).unwrap();
        let cp: Vec<u64> = perm.iter().map(|&i| c[i]).collect();
        let pp: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
        let b = gof_statistic(&cp, &pp).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn p_value_decreases_with_statistic(x in 0.0f64..200.0, dx in 0.001f64..50.0, df in 1usize..6) {
        let (p1, l1) = chi_square_sf(x, df);
        let (p2, l2) = chi_square_sf(x + dx, df);
        prop_assert!(p2 <= p1);
        prop_assert!(l2 <= l1);
        prop_assert!((0.0..=1.0).contains(&p1));
    }
}
