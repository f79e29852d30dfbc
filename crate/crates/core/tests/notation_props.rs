mod common;

use cdforge_core::notation::{linearize, linearize_with_fences, parse_linear, render_object, NotationTable};
use cdforge_core::om::OMObject;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn object(seed: u64) -> (NotationTable, OMObject) {
    let table = common::test_table();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = common::random_object(&mut rng, &table, 6);
    (table, o)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn linear_form_reads_back(seed in any::<u64>()) {
        let (table, o) = object(seed);
        let text = linearize(&o, &table);
        let back = parse_linear(&text, &table);
        prop_assert_eq!(back.as_ref(), Ok(&o), "{}", text);
    }

    #[test]
    fn every_fence_is_needed(seed in any::<u64>()) {
        let (table, o) = object(seed);
        let (text, fences) = linearize_with_fences(&o, &table);
        for (open, close) in fences {
            let stripped = format!("{}{}{}", &text[..open], &text[open + 1..close], &text[close + 1..]);
            let back = parse_linear(&stripped, &table).ok();
            prop_assert_ne!(back.as_ref(), Some(&o), "{} -> {}", text, stripped);
        }
    }

    #[test]
    fn rendering_is_total(seed in any::<u64>()) {
        let (table, o) = object(seed);
        let empty = render_object(&o, &NotationTable::default());
        let full = render_object(&o, &table);
        let symbols = o.symbols().len();
        prop_assert_eq!(empty.content_ids.len(), symbols);
        prop_assert_eq!(full.content_ids.len(), symbols);
        let mut pres: Vec<&String> = full.content_ids.values().collect();
        pres.sort();
        pres.dedup();
        prop_assert_eq!(pres.len(), symbols);
    }
}
