//! A SPARQL subset: `SELECT DISTINCT? ?vars WHERE { ... }` over basic graph
//! patterns with `;` and `,` lists, the keyword `a`, `OPTIONAL { ... }` and
//! `FILTER (!bound(?V))`.

use std::fmt;

use thiserror::Error;

use super::ns::{PrefixTable, RDF_TYPE};
use super::store::Term;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternTerm {
    Var(String),
    Iri(String),
    Literal(String),
}

impl PatternTerm {
    pub fn var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_term(&self) -> Option<Term> {
        match self {
            PatternTerm::Var(_) => None,
            PatternTerm::Iri(s) => Some(Term::Iri(s.clone())),
            PatternTerm::Literal(s) => Some(Term::Literal(s.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .filter_map(PatternTerm::var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Triple(TriplePattern),
    Optional(Vec<TriplePattern>),
    /// `FILTER (!bound(?v))`
    NotBound(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub select: Vec<String>,
    pub distinct: bool,
    pub patterns: Vec<Pattern>,
}

impl Query {
    pub fn required(&self) -> impl Iterator<Item = &TriplePattern> {
        self.patterns.iter().filter_map(|p| match p {
            Pattern::Triple(t) => Some(t),
            _ => None,
        })
    }

    pub fn optionals(&self) -> impl Iterator<Item = &[TriplePattern]> {
        self.patterns.iter().filter_map(|p| match p {
            Pattern::Optional(g) => Some(g.as_slice()),
            _ => None,
        })
    }

    pub fn not_bound(&self) -> impl Iterator<Item = &str> {
        self.patterns.iter().filter_map(|p| match p {
            Pattern::NotBound(v) => Some(v.as_str()),
            _ => None,
        })
    }

    /// Check the structural rules: select variables occur in the body, and a
    /// filtered variable occurs only in an earlier OPTIONAL group.
    pub fn check(&self) -> Result<(), QueryError> {
        if self.select.is_empty() {
            return Err(QueryError::Invalid("no variables selected".into()));
        }
        let in_body = |v: &str| {
            self.patterns.iter().any(|p| match p {
                Pattern::Triple(t) => t.vars().any(|x| x == v),
                Pattern::Optional(g) => g.iter().any(|t| t.vars().any(|x| x == v)),
                Pattern::NotBound(_) => false,
            })
        };
        for v in &self.select {
            if !in_body(v) {
                return Err(QueryError::Invalid(format!("?{v} is selected but never used")));
            }
        }
        for (i, p) in self.patterns.iter().enumerate() {
            let Pattern::NotBound(v) = p else { continue };
            if self.required().any(|t| t.vars().any(|x| x == v)) {
                return Err(QueryError::Invalid(format!(
                    "?{v} is filtered with !bound but bound by a required pattern"
                )));
            }
            let earlier_optional = self.patterns[..i].iter().any(|q| {
                matches!(q, Pattern::Optional(g) if g.iter().any(|t| t.vars().any(|x| x == v)))
            });
            if !earlier_optional {
                return Err(QueryError::Invalid(format!(
                    "?{v} is filtered but not bound by a preceding OPTIONAL"
                )));
            }
        }
        Ok(())
    }

    /// Query text that parses back to this query under `prefixes`.
    pub fn pretty(&self, prefixes: &PrefixTable) -> String {
        let mut out = String::from("SELECT ");
        if self.distinct {
            out.push_str("DISTINCT ");
        }
        let vars: Vec<String> = self.select.iter().map(|v| format!("?{v}")).collect();
        out.push_str(&vars.join(" "));
        out.push_str(" WHERE {\n");
        for p in &self.patterns {
            match p {
                Pattern::Triple(t) => {
                    out.push_str("  ");
                    out.push_str(&pretty_triple(t, prefixes));
                    out.push_str(" .\n");
                }
                Pattern::Optional(g) => {
                    out.push_str("  OPTIONAL {");
                    for t in g {
                        out.push(' ');
                        out.push_str(&pretty_triple(t, prefixes));
                        out.push_str(" .");
                    }
                    out.push_str(" }\n");
                }
                Pattern::NotBound(v) => out.push_str(&format!("  FILTER (!bound(?{v}))\n")),
            }
        }
        out.push('}');
        out
    }
}

fn pretty_triple(t: &TriplePattern, prefixes: &PrefixTable) -> String {
    let predicate = match &t.predicate {
        PatternTerm::Iri(i) if i == RDF_TYPE => "a".to_string(),
        other => pretty_term(other, prefixes),
    };
    format!(
        "{} {predicate} {}",
        pretty_term(&t.subject, prefixes),
        pretty_term(&t.object, prefixes)
    )
}

fn is_local_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-'))
}

fn pretty_term(t: &PatternTerm, prefixes: &PrefixTable) -> String {
    match t {
        PatternTerm::Var(v) => format!("?{v}"),
        PatternTerm::Iri(i) => match prefixes.compact(i) {
            Some((p, l)) if is_local_name(&l) => format!("{p}:{l}"),
            _ => format!("<{i}>"),
        },
        PatternTerm::Literal(s) => Term::Literal(s.clone()).to_string(),
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty(&PrefixTable::default()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("{line}:{column}: expected {}, found {found}", expected.join(" or "))]
    Parse {
        line: usize,
        column: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown prefix '{0}:'")]
    UnknownPrefix(String),
    #[error("{line}:{column}: unsupported feature {feature}")]
    Unsupported {
        feature: String,
        line: usize,
        column: usize,
    },
    #[error("invalid query: {0}")]
    Invalid(String),
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::Parse { .. } => "ParseError",
            QueryError::UnknownPrefix(_) => "UnknownPrefix",
            QueryError::Unsupported { .. } => "UnsupportedFeature",
            QueryError::Invalid(_) => "InvalidQuery",
        }
    }

    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            QueryError::Parse { line, column, .. } | QueryError::Unsupported { line, column, .. } => {
                Some((*line, *column))
            }
            _ => None,
        }
    }
}
