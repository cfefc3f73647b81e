use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use tcenter_core::catalog::{ListFilter, ListOrder};
use tcenter_core::exchange::CatalogDocument;
use tcenter_core::review::RubricScores;
use tcenter_core::store::TranslationStatus;
use tcenter_core::workflow::{score, PriorityInputs, PriorityWeights, RequestTarget};
use tcenter_core::{Center, Settings};

fn center_with(segments: &[(String, String, String, String)]) -> Center {
    let segs: Vec<serde_json::Value> = segments
        .iter()
        .map(|(id, text, before, after)| {
            serde_json::json!({"id": id, "text": text, "category": "informational_text",
                               "context_before": before, "context_after": after})
        })
        .collect();
    let doc: CatalogDocument = serde_json::from_value(serde_json::json!({
        "pages": [{"page_id": "p", "url": "/", "title": "t", "segments": segs}]
    }))
    .unwrap();
    let mut c = Center::new(Settings::with_codes(&["es", "fr"]));
    c.import_catalog(&doc).unwrap();
    c
}

fn ids_of(c: &Center, lang: &str, filter: ListFilter) -> Vec<String> {
    c.list_items(lang, filter, ListOrder::Id)
        .unwrap()
        .into_iter()
        .map(|l| l.item.id.to_string())
        .collect()
}

proptest! {
    #[test]
    fn snippet_has_exactly_one_marker_pair(
        before in ".{0,12}", text in ".{1,12}", after in ".{0,12}", translated in proptest::option::of(".{1,12}")
    ) {
        prop_assume!(!text.trim().is_empty());
        let mut c = center_with(&[("x".into(), text, before, after)]);
        if let Some(t) = translated.filter(|t| !t.trim().is_empty()) {
            let m = c.register_member("m", &[], "h").unwrap().member_id.to_string();
            c.submit_translation("x", "es", &t, &m, None).unwrap();
        }
        let s = c.context_snippet("x", "es").unwrap();
        prop_assert_eq!(s.matches("[[").count(), 1);
        prop_assert_eq!(s.matches("]]").count(), 1);
        prop_assert!(s.find("[[").unwrap() < s.find("]]").unwrap());
        prop_assert_eq!(s.chars().filter(|&ch| ch == '[').count(), 2);
        prop_assert_eq!(s.chars().filter(|&ch| ch == ']').count(), 2);
    }

    #[test]
    fn translated_and_untranslated_partition_all(
        n in 1usize..30, translated in proptest::collection::vec(any::<bool>(), 30)
    ) {
        let segments: Vec<_> = (0..n).map(|i| (format!("i{i:02}"), format!("t{i}"), String::new(), String::new())).collect();
        let mut c = center_with(&segments);
        let m = c.register_member("m", &[], "h").unwrap().member_id.to_string();
        for (i, _) in translated.iter().enumerate().take(n).filter(|(_, &t)| t) {
            c.submit_translation(&format!("i{i:02}"), "es", "x", &m, None).unwrap();
        }
        for lang in ["es", "fr"] {
            let t: BTreeSet<String> = ids_of(&c, lang, ListFilter::Translated).into_iter().collect();
            let u: BTreeSet<String> = ids_of(&c, lang, ListFilter::Untranslated).into_iter().collect();
            let all: BTreeSet<String> = ids_of(&c, lang, ListFilter::All).into_iter().collect();
            prop_assert!(t.is_disjoint(&u));
            prop_assert_eq!(t.union(&u).cloned().collect::<BTreeSet<_>>(), all);
            let p = c.progress(lang);
            prop_assert_eq!(p.translated_count, t.len());
            prop_assert_eq!(p.total_count, n);
        }
    }

    #[test]
    fn priority_is_monotone(
        views in 0u64..5000, requests in 0u32..50, q in 0.0f64..=1.0,
        dv in 0u64..100, dr in 0u32..5, dq in 0.0f64..=1.0,
    ) {
        let w = PriorityWeights::default();
        let base = PriorityInputs { view_count: views, request_count: requests, quality: Some(q) };
        let s = score(&base, &w);
        prop_assert!(s >= 0.0);
        let more_views = PriorityInputs { view_count: views + dv, ..base };
        let more_requests = PriorityInputs { request_count: requests + dr, ..base };
        let worse = PriorityInputs { quality: Some((q - dq).max(0.0)), ..base };
        prop_assert!(score(&more_views, &w) >= s);
        prop_assert!(score(&more_requests, &w) >= s);
        prop_assert!(score(&worse, &w) >= s);
        let untranslated = PriorityInputs { quality: None, ..base };
        prop_assert!(score(&untranslated, &w) >= w.untranslated);
    }

    #[test]
    fn quality_stays_in_unit_interval_and_moves_the_right_way(
        rubrics in proptest::collection::vec(proptest::array::uniform7(0u8..=3), 1..8)
    ) {
        let mut c = center_with(&[("x".into(), "Hello".into(), String::new(), String::new())]);
        let author = c.register_member("author", &[], "h").unwrap().member_id.to_string();
        let t = c.submit_translation("x", "es", "Hola", &author, None).unwrap();
        let tid = t.translation_id.to_string();
        let clamp = [3u8, 3, 1, 1, 1, 1, 3];
        for (i, raw) in rubrics.iter().enumerate() {
            let mut fields = *raw;
            for (f, max) in fields.iter_mut().zip(clamp) { *f = (*f).min(max); }
            let reviewer = c.register_member(&format!("r{i}"), &[], "h").unwrap().member_id.to_string();
            c.submit_review(&tid, &reviewer, RubricScores::from_array(fields).unwrap(), None).unwrap();
            let q = c.quality("x", "es");
            prop_assert!((0.0..=1.0).contains(&q));
        }
        let before = c.quality("x", "es");
        let best = c.register_member("best", &[], "h").unwrap().member_id.to_string();
        c.submit_review(&tid, &best, RubricScores::new(3, 3, 1, 1, 1, 1, 3).unwrap(), None).unwrap();
        let after_best = c.quality("x", "es");
        prop_assert!(after_best >= before);
        let worst = c.register_member("worst", &[], "h").unwrap().member_id.to_string();
        c.submit_review(&tid, &worst, RubricScores::new(0, 0, 0, 0, 0, 0, 0).unwrap(), None).unwrap();
        prop_assert!(c.quality("x", "es") <= after_best);
    }

    #[test]
    fn repeated_requests_count_once(k in 1usize..10) {
        let mut c = center_with(&[("a".into(), "A".into(), String::new(), String::new()), ("b".into(), "B".into(), String::new(), String::new())]);
        let m = c.register_member("m", &[], "h").unwrap().member_id.to_string();
        for _ in 0..k {
            c.request_translation(RequestTarget::Page("p".into()), "es", &m).unwrap();
        }
        prop_assert_eq!(c.request_count("a", "es"), 1);
        prop_assert_eq!(c.request_count("b", "es"), 1);
    }

    #[test]
    fn version_history_stays_dense(ops in proptest::collection::vec((0usize..3, any::<bool>(), 0u32..4), 1..40)) {
        let segments: Vec<_> = (0..3).map(|i| (format!("i{i}"), format!("t{i}"), String::new(), String::new())).collect();
        let mut c = center_with(&segments);
        let m = c.register_member("m", &[], "h").unwrap().member_id.to_string();
        let mut successes: BTreeMap<usize, u32> = BTreeMap::new();
        let mut comments: BTreeMap<usize, usize> = BTreeMap::new();
        for (item, comment, base) in ops {
            let id = format!("i{item}");
            if comment {
                c.add_comment(&id, "es", &m, "note", None).unwrap();
                *comments.entry(item).or_default() += 1;
            }
            let base = if base == 0 { None } else { Some(base) };
            if c.submit_translation(&id, "es", "v", &m, base).is_ok() {
                *successes.entry(item).or_default() += 1;
            }
            prop_assert!(c.check_invariants().is_empty());
            prop_assert_eq!(c.comments(&id, "es").unwrap().len(), comments.get(&item).copied().unwrap_or(0));
        }
        for (item, n) in successes {
            let history = c.translation_history(&format!("i{item}"), "es").unwrap();
            prop_assert_eq!(history.len() as u32, n);
            prop_assert_eq!(history.last().unwrap().version, n);
            prop_assert_eq!(history.iter().filter(|t| t.status == TranslationStatus::Current).count(), 1);
        }
    }

    #[test]
    fn glossary_variants_never_shrink(texts in proptest::collection::vec(("[a-c]{1,3}", proptest::option::of("[xy]")), 1..20)) {
        let mut c = Center::new(Settings::with_codes(&["es"]));
        let m = c.register_member("m", &[], "h").unwrap().member_id.to_string();
        let mut last = 0;
        for (text, region) in texts {
            let entry = c.glossary_upsert("Computer", "", "es", &text, region.as_deref(), &m).unwrap();
            let len = entry.translations.values().map(Vec::len).sum::<usize>();
            prop_assert!(len >= last);
            last = len;
        }
    }
}

#[test]
fn untranslated_with_defaults_and_perfect_translation() {
    let mut c = center_with(&[("a".into(), "A".into(), String::new(), String::new())]);
    let w = PriorityWeights::default();
    assert_eq!(c.compute_priority("a", "es", &w).unwrap(), 3.0);
    let author = c.register_member("author", &[], "h").unwrap().member_id.to_string();
    let reviewer = c.register_member("reviewer", &[], "h").unwrap().member_id.to_string();
    let t = c.submit_translation("a", "es", "A", &author, None).unwrap();
    c.submit_review(t.translation_id.as_str(), &reviewer, RubricScores::new(3, 3, 1, 1, 1, 1, 3).unwrap(), None)
        .unwrap();
    assert_eq!(c.compute_priority("a", "es", &w).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn poll_tally_matches_replayed_votes(votes in proptest::collection::vec((0usize..6, 0usize..4), 0..40)) {
        let mut c = Center::new(Settings::with_codes(&["es"]));
        let members: Vec<String> = (0..6)
            .map(|i| c.register_member(&format!("v{i}"), &[], "h").unwrap().member_id.to_string())
            .collect();
        let options: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let poll = c.create_poll("?", &options, None, &members[0]).unwrap().poll_id.clone();
        let mut replay: BTreeMap<usize, usize> = BTreeMap::new();
        for (voter, option) in votes {
            let tally = c.poll_vote(&poll, &members[voter], option).unwrap();
            replay.insert(voter, option);
            prop_assert_eq!(tally.voters, replay.len());
            prop_assert_eq!(tally.counts.iter().sum::<u32>() as usize, replay.len());
            for (o, &count) in tally.counts.iter().enumerate() {
                prop_assert_eq!(count as usize, replay.values().filter(|&&v| v == o).count());
            }
        }
    }
}
