use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{CitationIndex, Corpus};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JournalMetrics {
    pub journal_id: String,
    pub jif: f64,
    pub citation_numerator: u64,
    pub citable_denominator: u64,
}

/// Two-year impact factor for every journal with at least one citable item
/// in `target_year - 1` or `target_year - 2`. Citations count only when the
/// citing paper is itself published in `target_year`.
pub fn compute_jif(corpus: &Corpus, index: &CitationIndex, target_year: i32) -> BTreeMap<String, JournalMetrics> {
    let window = (target_year - 2)..=(target_year - 1);
    let mut num: HashMap<&str, u64> = HashMap::new();
    let mut den: HashMap<&str, u64> = HashMap::new();
    for p in corpus.iter() {
        if !window.contains(&p.year()) {
            continue;
        }
        let journal = p.journal_id.as_str();
        if p.doc_type.is_citable() {
            *den.entry(journal).or_default() += 1;
        }
        let cites =
            index.cited_by(&p.doc_id).iter().filter(|c| corpus.get(c).is_some_and(|c| c.year() == target_year)).count()
                as u64;
        *num.entry(journal).or_default() += cites;
    }

    let mut out = BTreeMap::new();
    let mut journals: Vec<&str> = num.keys().chain(den.keys()).copied().collect();
    journals.sort_unstable();
    journals.dedup();
    for j in journals {
        let d = den.get(j).copied().unwrap_or(0);
        let n = num.get(j).copied().unwrap_or(0);
        if d == 0 {
            log::warn!("journal {j}: no citable items in {}-{}, JIF omitted", target_year - 2, target_year - 1);
            continue;
        }
        out.insert(
            j.to_string(),
            JournalMetrics {
                journal_id: j.to_string(),
                jif: n as f64 / d as f64,
                citation_numerator: n,
                citable_denominator: d,
            },
        );
    }
    out
}

/// JIF of the journal each paper appeared in, keyed by doc_id. Papers in
/// journals without a JIF are absent.
pub fn paper_jif(corpus: &Corpus, jif: &BTreeMap<String, JournalMetrics>) -> BTreeMap<String, f64> {
    corpus.iter().filter_map(|p| jif.get(&p.journal_id).map(|m| (p.doc_id.clone(), m.jif))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_date, resolve_citations, DocType, PaperRecord};
    use std::collections::BTreeSet;

    fn p(id: &str, journal: &str, date: &str, refs: Vec<String>) -> PaperRecord {
        PaperRecord {
            doc_id: id.into(),
            title: String::new(),
            abstract_text: "x".into(),
            pub_date: parse_date(date).unwrap(),
            journal_id: journal.into(),
            doc_type: DocType::Research,
            retracted: false,
            field_groups: BTreeSet::new(),
            funders: BTreeSet::new(),
            reference_ids: refs,
        }
    }

    #[test]
    fn direct_ratio() {
        // 50 citable items in J over 2021-2022, cited twice each by 2023 papers.
        let mut papers = Vec::new();
        for i in 0..50 {
            papers.push(p(&format!("j{i}"), "J", if i % 2 == 0 { "2021-06" } else { "2022-06" }, vec![]));
        }
        for i in 0..100 {
            papers.push(p(&format!("c{i}"), "K", "2023-02", vec![format!("j{}", i % 50)]));
        }
        // a 2022 citation does not count toward 2023
        papers.push(p("old", "K", "2022-02", vec!["j0".into()]));
        let c = Corpus::from_records(papers).unwrap();
        let m = compute_jif(&c, &resolve_citations(&c), 2023);
        assert_eq!(m["J"].citation_numerator, 100);
        assert_eq!(m["J"].citable_denominator, 50);
        assert_eq!(m["J"].jif, 2.0);
    }

    #[test]
    fn empty_window_omitted() {
        let c = Corpus::from_records(vec![p("a", "J", "2019-01", vec![]), p("b", "K", "2023-01", vec!["a".into()])])
            .unwrap();
        assert!(compute_jif(&c, &resolve_citations(&c), 2023).is_empty());
    }
}
