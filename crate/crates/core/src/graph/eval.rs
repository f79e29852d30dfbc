use std::collections::BTreeMap;

use serde::Serialize;

use super::query::{PatternTerm, Query, TriplePattern};
use super::store::{Term, TripleStore};

type Row = BTreeMap<String, Term>;

/// Query result: one row per solution, columns in select order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Solutions {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<Option<Term>>>,
}

impl Solutions {
    /// Values of one column, skipping unbound cells.
    pub fn column(&self, var: &str) -> Vec<&Term> {
        let Some(i) = self.vars.iter().position(|v| v == var) else {
            return Vec::new();
        };
        self.rows.iter().filter_map(|r| r[i].as_ref()).collect()
    }
}

fn resolve<'a>(t: &'a PatternTerm, row: &'a Row) -> Result<Option<Term>, ()> {
    match t {
        PatternTerm::Var(v) => Ok(row.get(v).cloned()),
        other => Ok(other.as_term()),
    }
}

/// Extend `row` with every way `tp` matches the store.
fn extend(store: &TripleStore, tp: &TriplePattern, row: &Row) -> Vec<Row> {
    let (Ok(s), Ok(p), Ok(o)) = (
        resolve(&tp.subject, row),
        resolve(&tp.predicate, row),
        resolve(&tp.object, row),
    ) else {
        return Vec::new();
    };
    // Subjects and predicates are always IRIs.
    let s_str = match &s {
        Some(Term::Iri(i)) => Some(i.as_str()),
        Some(Term::Literal(_)) => return Vec::new(),
        None => None,
    };
    let p_str = match &p {
        Some(Term::Iri(i)) => Some(i.as_str()),
        Some(Term::Literal(_)) => return Vec::new(),
        None => None,
    };
    let mut out = Vec::new();
    for t in store.matching(s_str, p_str, o.as_ref()) {
        let mut next = row.clone();
        let mut ok = true;
        for (pt, value) in [
            (&tp.subject, Term::Iri(t.subject.clone())),
            (&tp.predicate, Term::Iri(t.predicate.clone())),
            (&tp.object, t.object.clone()),
        ] {
            if let PatternTerm::Var(v) = pt {
                match next.get(v) {
                    Some(existing) if existing != &value => ok = false,
                    Some(_) => {}
                    None => {
                        next.insert(v.clone(), value);
                    }
                }
            }
        }
        if ok {
            out.push(next);
        }
    }
    out
}

fn join_all(store: &TripleStore, patterns: &[TriplePattern], rows: Vec<Row>) -> Vec<Row> {
    let mut rows = rows;
    for tp in patterns {
        rows = rows.iter().flat_map(|r| extend(store, tp, r)).collect();
        if rows.is_empty() {
            break;
        }
    }
    rows
}

/// Evaluate a query: required patterns first, then each OPTIONAL group as a
/// left join in textual order, then `!bound` filters, then projection,
/// DISTINCT and sorting.
pub fn eval_query(q: &Query, store: &TripleStore) -> Solutions {
    let required: Vec<TriplePattern> = q.required().cloned().collect();
    let mut rows = join_all(store, &required, vec![Row::new()]);
    for group in q.optionals() {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                let ext = join_all(store, group, vec![r.clone()]);
                if ext.is_empty() {
                    vec![r]
                } else {
                    ext
                }
            })
            .collect();
    }
    for v in q.not_bound() {
        rows.retain(|r| !r.contains_key(v));
    }
    let mut projected: Vec<Vec<Option<Term>>> = rows
        .into_iter()
        .map(|r| q.select.iter().map(|v| r.get(v).cloned()).collect())
        .collect();
    projected.sort();
    if q.distinct {
        projected.dedup();
    }
    Solutions {
        vars: q.select.clone(),
        rows: projected,
    }
}
