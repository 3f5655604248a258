//! Cross-module properties: retrieval, coloring, suggestions, logs and
//! statistics, checked on generated inputs.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeZone, Utc};
use proptest::prelude::*;

use postedit_core::analytics::{cohen_kappa, edit_type_frequencies, pearson_rho, selection_rates};
use postedit_core::color::{expand_spans, merge_spans, project_to_target, Color, ColoredSuggestion};
use postedit_core::editlog::{export_alignments, export_xml, import_xml};
use postedit_core::retrieval::{build_index, retrieve_matches};
use postedit_core::suggestions::{assemble_suggestions, ExternalTables, Origin};
use postedit_core::{similarity, EditLogRecord, RetrievalConfig, Segment, Session, TmEntry, TranslationMemory};

const WORDS: &[&str] = &["the", "house", "is", "small", "a", "cat", "sat", "on", "mat", "red", "big", "dog"];

fn sentence(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 0..=max).prop_map(|w| w.join(" "))
}

fn nonempty_sentence(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..=max).prop_map(|w| w.join(" "))
}

fn entry(id: &str, source: &str, target: &str, links: &[(usize, usize)]) -> TmEntry {
    let s = Segment::new(id, "en", source);
    let t = Segment::new(id, "de", target);
    let align = links
        .iter()
        .copied()
        .filter(|&(i, j)| i < s.len() && j < t.len())
        .collect();
    TmEntry::new(id, s, t, align).unwrap()
}

fn arb_entry(id: usize) -> impl Strategy<Value = TmEntry> {
    (
        nonempty_sentence(8),
        nonempty_sentence(8),
        prop::collection::vec((0..8usize, 0..8usize), 0..10),
    )
        .prop_map(move |(s, t, links)| entry(&format!("e{id:03}"), &s, &t, &links))
}

fn arb_memory() -> impl Strategy<Value = Vec<TmEntry>> {
    prop::collection::vec(any::<u8>(), 1..25).prop_flat_map(|ids| {
        ids.iter()
            .enumerate()
            .map(|(i, _)| arb_entry(i))
            .collect::<Vec<_>>()
    })
}

fn dedupe_sources(entries: Vec<TmEntry>) -> Vec<TmEntry> {
    let mut seen = BTreeSet::new();
    entries
        .into_iter()
        .filter(|e| seen.insert(e.source.norms().join(" ")))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn retrieval_is_deterministic(entries in arb_memory(), q in sentence(8)) {
        let tm = TranslationMemory::from_entries(entries.clone()).unwrap();
        let tm2 = TranslationMemory::from_entries(entries).unwrap();
        let query = Segment::new("q", "en", q);
        let cfg = RetrievalConfig::default();
        let a = serde_json::to_vec(&tm.retrieve(&query, &cfg)).unwrap();
        let b = serde_json::to_vec(&tm2.retrieve(&query, &cfg)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn verbatim_source_is_in_top_k(entries in arb_memory(), pick in any::<prop::sample::Index>(), k in 1usize..4) {
        let tm = TranslationMemory::from_entries(entries).unwrap();
        let ids: Vec<&String> = tm.entries().keys().collect();
        let target = tm.get(ids[pick.index(ids.len())]).unwrap();
        let query = Segment::new("q", "en", target.source.raw.clone());
        let hits = tm.index().ir_query(&query, k);
        let verbatim: Vec<&str> = tm
            .entries()
            .values()
            .filter(|e| e.source.norms() == query.norms())
            .map(|e| e.id.as_str())
            .collect();
        // Some verbatim entry is returned whenever one exists.
        prop_assert!(hits.iter().any(|h| verbatim.contains(&h.entry_id.as_str())));
    }

    #[test]
    fn top1_maximizes_similarity_over_candidates(entries in arb_memory(), q in nonempty_sentence(8), k in 1usize..30) {
        let entries = dedupe_sources(entries);
        let index = build_index(&entries).unwrap();
        let map: BTreeMap<String, TmEntry> = entries.into_iter().map(|e| (e.id.clone(), e)).collect();
        let query = Segment::new("q", "en", q);
        let candidates = index.ir_query(&query, k);
        let ranked = retrieve_matches(&index, &map, &query, k, 5);
        if candidates.is_empty() {
            prop_assert!(ranked.is_empty());
        } else {
            let best = candidates
                .iter()
                .map(|c| similarity(&query, &map[&c.entry_id].source).value())
                .fold(f64::MIN, f64::max);
            prop_assert_eq!(ranked[0].sim(), best);
        }
    }

    #[test]
    fn doc_count_and_df_are_monotone(entries in arb_memory()) {
        let mut tm = TranslationMemory::new();
        for e in entries {
            let before_docs = tm.index().doc_count();
            let before_df: Vec<(String, usize)> =
                tm.index().terms().map(|t| (t.to_string(), tm.index().doc_freq(t))).collect();
            tm.insert(e).unwrap();
            prop_assert_eq!(tm.index().doc_count(), before_docs + 1);
            for (t, df) in before_df {
                prop_assert!(tm.index().doc_freq(&t) >= df);
            }
        }
    }

    #[test]
    fn coloring_is_a_partition(e in arb_entry(0), q in sentence(10)) {
        let query = Segment::new("q", "en", q);
        let tm = TranslationMemory::from_entries(vec![e.clone()]).unwrap();
        for c in tm.retrieve(&query, &RetrievalConfig { brute_force: true, ..Default::default() }) {
            let s = ColoredSuggestion::build(&query, &e, &c);
            let src: Vec<usize> = s.source_labels.iter().map(|l| l.index).collect();
            let tgt: Vec<usize> = s.target_labels.iter().map(|l| l.index).collect();
            prop_assert_eq!(src, (0..e.source.len()).collect::<Vec<_>>());
            prop_assert_eq!(tgt, (0..e.target.len()).collect::<Vec<_>>());
            let spans = merge_spans(&s.target_labels).unwrap();
            prop_assert_eq!(expand_spans(&spans), s.target_labels.clone());
        }
    }

    #[test]
    fn identity_query_is_all_green(e in arb_entry(0)) {
        let full: BTreeSet<(usize, usize)> =
            (0..e.source.len()).flat_map(|i| (0..e.target.len()).map(move |j| (i, j))).collect();
        let total = TmEntry::new(e.id.clone(), e.source.clone(), e.target.clone(), full).unwrap();
        let tm = TranslationMemory::from_entries(vec![total.clone()]).unwrap();
        let query = Segment::new("q", "en", total.source.raw.clone());
        let c = &tm.retrieve(&query, &RetrievalConfig::default())[0];
        let s = ColoredSuggestion::build(&query, &total, c);
        prop_assert!(s.source_labels.iter().all(|l| l.color == Color::Green));
        prop_assert!(s.target_labels.iter().all(|l| l.color == Color::Green));
    }

    #[test]
    fn greening_a_source_token_never_reddens_a_target(e in arb_entry(0), mask in any::<u16>(), flip in 0usize..8) {
        let labels: Vec<_> = (0..e.source.len())
            .map(|i| postedit_core::TokenLabel {
                index: i,
                color: if mask >> i & 1 == 1 { Color::Green } else { Color::Red },
            })
            .collect();
        let mut flipped = labels.clone();
        if let Some(l) = flipped.get_mut(flip) {
            l.color = Color::Green;
        }
        let before = project_to_target(&labels, &e);
        let after = project_to_target(&flipped, &e);
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(!(b.color == Color::Green && a.color == Color::Red));
        }
    }

    #[test]
    fn suggestion_order_follows_retrieval(entries in arb_memory(), q in sentence(8)) {
        let tm = TranslationMemory::from_entries(entries).unwrap();
        let seg = Segment::new("q", "en", q);
        let cfg = RetrievalConfig::default();
        let set = assemble_suggestions(&seg, &tm, &ExternalTables::new(), &cfg);
        let got: Vec<&str> = set.tm.iter().map(|s| s.entry_id.as_str()).collect();
        let want: Vec<String> = tm.retrieve(&seg, &cfg).into_iter().map(|c| c.entry_id).collect();
        prop_assert_eq!(got, want.iter().map(String::as_str).collect::<Vec<_>>());
    }

    #[test]
    fn external_ingest_is_last_write_wins(rows in prop::collection::vec((0..5u8, nonempty_sentence(3)), 0..20)) {
        let text: String = rows.iter().map(|(id, t)| format!("s{id}\t{t}\n")).collect();
        let mut tables = ExternalTables::new();
        tables.ingest_external_table(Origin::Ape, &text).unwrap();
        let mut want = BTreeMap::new();
        for (id, t) in &rows {
            want.insert(format!("s{id}"), t.clone());
        }
        for (id, t) in &want {
            prop_assert_eq!(tables.get(Origin::Ape, id), Some(t.as_str()));
        }
        let once = tables.clone();
        tables.ingest_external_table(Origin::Ape, &text).unwrap();
        prop_assert_eq!(tables, once);
    }
}

fn ts(ms: i64) -> DateTime<Utc> {
    Utc.timestamp_millis_opt(1_600_000_000_000 + ms).unwrap()
}

const ORIGINS: [Origin; 4] = [Origin::Tm, Origin::Mt, Origin::Ape, Origin::Scratch];

fn arb_session() -> impl Strategy<Value = Session> {
    let record = (
        prop::sample::select(&ORIGINS[..]),
        sentence(8),
        sentence(8),
        0i64..10_000_000,
        0i64..600_000,
        "[ -~&<>\"'\t\n\r]{0,6}",
    );
    (prop::collection::vec(record, 0..12), "[a-z0-9]{1,6}").prop_map(|(recs, translator)| {
        let mut session = Session::new("s1", "p1", translator);
        for (i, (origin, initial, fin, start, dur, noise)) in recs.into_iter().enumerate() {
            let initial = if origin == Origin::Scratch { String::new() } else { format!("{initial}{noise}") };
            let fin = format!("{noise}{fin}");
            session
                .record_postedit(&format!("seg{i}"), origin, &initial, &fin, ts(start), ts(start + dur))
                .unwrap();
        }
        session
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn log_round_trip(session in arb_session()) {
        let bytes = export_xml(&session);
        prop_assert_eq!(&export_xml(&session), &bytes);
        let back = import_xml(&bytes).unwrap();
        prop_assert_eq!(back, session);
    }

    #[test]
    fn stored_counts_match_recomputation(session in arb_session()) {
        for r in &session.records {
            let again = EditLogRecord::compute(
                r.segment_id.clone(), r.translator_id.clone(), r.origin,
                r.initial_text.clone(), r.final_text.clone(), r.started_at, r.finished_at,
            ).unwrap();
            prop_assert_eq!(&again, r);
        }
    }

    #[test]
    fn exported_links_stay_in_range(e in arb_entry(0), fin in sentence(10), as_tm in any::<bool>()) {
        let origin = if as_tm { Origin::Tm } else { Origin::Mt };
        let r = EditLogRecord::compute("g", "T", origin, e.target.raw.clone(), fin, ts(0), ts(1)).unwrap();
        let final_len = Segment::new("f", "de", r.final_text.clone()).len();
        for (s, t) in export_alignments(&r, &e.source, Some(&e)) {
            prop_assert!(s < e.source.len());
            prop_assert!(t < final_len);
        }
    }

    #[test]
    fn kappa_bounds_symmetry_and_self(a in prop::collection::vec(0u8..4, 1..40), b in prop::collection::vec(0u8..4, 1..40)) {
        let n = a.len().min(b.len());
        let (a, b) = (&a[..n], &b[..n]);
        let k = cohen_kappa(a, b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&k));
        prop_assert_eq!(k, cohen_kappa(b, a).unwrap());
        prop_assert_eq!(cohen_kappa(a, a).unwrap(), 1.0);
    }

    #[test]
    fn pearson_bounds_self_and_affine(
        xy in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..40),
        scale in 0.01f64..100.0,
        shift in -1e3f64..1e3,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let Ok(r) = pearson_rho(&x, &y) else { return Ok(()) };
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert!((pearson_rho(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let x2: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
        prop_assert!((pearson_rho(&x2, &y).unwrap() - r).abs() < 1e-9);
    }

    #[test]
    fn rates_sum_to_one_and_edits_add_up(a in arb_session(), b in arb_session()) {
        let mut all = a.records.clone();
        all.extend(b.records.clone());
        for row in selection_rates(&all).rows {
            let sum: f64 = row.rates.values().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
        let whole = edit_type_frequencies(&all).totals;
        let parts = edit_type_frequencies(&a.records).totals + edit_type_frequencies(&b.records).totals;
        prop_assert_eq!(whole, parts);
    }
}
