use nliprobe_core::corpus::{parse_jsonl, write_jsonl, Corpus, Label, NliExample, Origin, Split};
use proptest::prelude::*;

fn text() -> impl Strategy<Value = String> {
    "[A-Za-z0-9 ,.!?'\"\\\\é\t-]{1,40}".prop_filter("non-blank", |s| !s.trim().is_empty())
}

fn examples() -> impl Strategy<Value = Vec<NliExample>> {
    prop::collection::vec(
        (text(), text(), 0usize..3, prop::option::of("[a-z_]{1,8}")),
        1..20,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (premise, hypothesis, label, aug))| NliExample {
                id: format!("ex-{i}"),
                premise,
                hypothesis,
                label: Label::from_code(label).unwrap(),
                origin: aug.map_or(Origin::Original, Origin::Augmented),
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn jsonl_round_trip(rows in examples()) {
        let corpus = Corpus::new(Split::Train, rows).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&corpus, &mut buf).unwrap();
        let parsed = parse_jsonl(buf.as_slice(), Split::Train).unwrap();
        prop_assert_eq!(parsed.corpus.examples(), corpus.examples());

        let mut again = Vec::new();
        write_jsonl(&parsed.corpus, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }
}
