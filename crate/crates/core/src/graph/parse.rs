use super::ns::{PrefixTable, RDF_TYPE};
use super::query::{Pattern, PatternTerm, Query, QueryError, TriplePattern};
use crate::xml::line_col;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Punct(char),
    Var(String),
    Iri(String),
    Literal(String),
    /// A bare word or `prefix:local` name.
    Word(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Punct(c) => format!("'{c}'"),
            Tok::Var(v) => format!("?{v}"),
            Tok::Iri(i) => format!("<{i}>"),
            Tok::Literal(_) => "a literal".into(),
            Tok::Word(w) => format!("'{w}'"),
            Tok::Eof => "end of input".into(),
        }
    }
}

const UNSUPPORTED: &[&str] = &[
    "UNION", "GRAPH", "MINUS", "BIND", "VALUES", "SERVICE", "ORDER", "LIMIT", "OFFSET", "GROUP",
    "HAVING", "CONSTRUCT", "ASK", "DESCRIBE", "REDUCED", "FROM", "PREFIX", "BASE", "EXISTS",
    "NOT", "REGEX",
];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, QueryError> {
    let err = |pos: usize, found: String, expected: &str| {
        let (line, column) = line_col(src, pos);
        QueryError::Parse {
            line,
            column,
            expected: vec![expected.to_string()],
            found,
        }
    };
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let is_word = |c: char| c.is_alphanumeric() || c == '_' || c == '-';
    while i < src.len() {
        let c = src[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '#' {
            while i < src.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        match c {
            '{' | '}' | '(' | ')' | '.' | ';' | ',' | '!' | '*' | '>' | '=' | '&' | '|' | '+' => {
                out.push((Tok::Punct(c), start));
                i += 1;
            }
            '?' | '$' => {
                i += 1;
                let name_start = i;
                while let Some(ch) = src[i..].chars().next().filter(|&ch| ch.is_alphanumeric() || ch == '_') {
                    i += ch.len_utf8();
                }
                if i == name_start {
                    return Err(err(start, format!("'{c}'"), "a variable name"));
                }
                out.push((Tok::Var(src[name_start..i].to_string()), start));
            }
            '<' => {
                let end = src[i + 1..]
                    .find(|ch: char| ch == '>' || ch.is_whitespace())
                    .map(|k| i + 1 + k)
                    .filter(|&k| bytes[k] == b'>');
                match end {
                    Some(end) => {
                        out.push((Tok::Iri(src[i + 1..end].to_string()), start));
                        i = end + 1;
                    }
                    None => {
                        out.push((Tok::Punct('<'), start));
                        i += 1;
                    }
                }
            }
            '"' => {
                i += 1;
                let mut text = String::new();
                loop {
                    let Some(ch) = src[i..].chars().next() else {
                        return Err(err(start, "unterminated literal".into(), "'\"'"));
                    };
                    i += ch.len_utf8();
                    match ch {
                        '"' => break,
                        '\\' => {
                            let esc = src[i..].chars().next().ok_or_else(|| err(i, "end of input".into(), "an escape"))?;
                            i += esc.len_utf8();
                            text.push(match esc {
                                'n' => '\n',
                                't' => '\t',
                                'r' => '\r',
                                '"' => '"',
                                '\\' => '\\',
                                other => return Err(err(i - 2, format!("'\\{other}'"), "a valid escape")),
                            });
                        }
                        ch => text.push(ch),
                    }
                }
                out.push((Tok::Literal(text), start));
            }
            c if is_word(c) => {
                while let Some(ch) = src[i..].chars().next().filter(|&ch| is_word(ch) || ch == ':') {
                    i += ch.len_utf8();
                }
                out.push((Tok::Word(src[start..i].to_string()), start));
            }
            other => {
                return Err(err(start, format!("'{other}'"), "a query token"));
            }
        }
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    prefixes: &'a PrefixTable,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> QueryError {
        let (line, column) = line_col(self.src, self.offset());
        if let Tok::Word(w) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if UNSUPPORTED.contains(&upper.as_str()) {
                return QueryError::Unsupported {
                    feature: upper,
                    line,
                    column,
                };
            }
        }
        QueryError::Parse {
            line,
            column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn unsupported(&self, feature: &str) -> QueryError {
        let (line, column) = line_col(self.src, self.offset());
        QueryError::Unsupported {
            feature: feature.to_string(),
            line,
            column,
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[kw]))
        }
    }

    fn punct(&mut self, c: char) -> Result<(), QueryError> {
        if self.peek() == &Tok::Punct(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("'{c}'")]))
        }
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        self.keyword("SELECT")?;
        let distinct = self.at_keyword("DISTINCT");
        if distinct {
            self.bump();
        }
        let mut select = Vec::new();
        loop {
            match self.peek() {
                Tok::Var(v) => {
                    select.push(v.clone());
                    self.bump();
                }
                Tok::Punct('*') => return Err(self.unsupported("SELECT *")),
                _ if select.is_empty() => return Err(self.error(&["a variable"])),
                _ => break,
            }
        }
        self.keyword("WHERE")?;
        self.punct('{')?;
        let patterns = self.group()?;
        self.punct('}')?;
        if self.peek() != &Tok::Eof {
            return Err(self.error(&["end of input"]));
        }
        Ok(Query {
            select,
            distinct,
            patterns,
        })
    }

    fn group(&mut self) -> Result<Vec<Pattern>, QueryError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Tok::Punct('}') => return Ok(out),
                Tok::Punct('.') => {
                    self.bump();
                }
                Tok::Punct('{') => return Err(self.unsupported("nested group")),
                _ if self.at_keyword("OPTIONAL") => {
                    self.bump();
                    self.punct('{')?;
                    let mut group = Vec::new();
                    while self.peek() != &Tok::Punct('}') {
                        if self.peek() == &Tok::Punct('.') {
                            self.bump();
                            continue;
                        }
                        if self.at_keyword("OPTIONAL") || self.at_keyword("FILTER") {
                            return Err(self.unsupported("nested OPTIONAL or FILTER"));
                        }
                        self.triples(&mut group)?;
                    }
                    self.bump();
                    if group.is_empty() {
                        return Err(self.error(&["a triple pattern"]));
                    }
                    out.push(Pattern::Optional(group));
                }
                _ if self.at_keyword("FILTER") => {
                    self.bump();
                    out.push(Pattern::NotBound(self.filter()?));
                }
                _ => {
                    let mut ts = Vec::new();
                    self.triples(&mut ts)?;
                    out.extend(ts.into_iter().map(Pattern::Triple));
                }
            }
        }
    }

    fn filter(&mut self) -> Result<String, QueryError> {
        self.punct('(')?;
        if self.peek() != &Tok::Punct('!') {
            return Err(self.unsupported("FILTER expression other than !bound"));
        }
        self.bump();
        if !self.at_keyword("bound") {
            return Err(self.unsupported("FILTER expression other than !bound"));
        }
        self.bump();
        self.punct('(')?;
        let Tok::Var(v) = self.peek().clone() else {
            return Err(self.error(&["a variable"]));
        };
        self.bump();
        self.punct(')')?;
        self.punct(')')?;
        Ok(v)
    }

    fn triples(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let subject = self.term(false)?;
        loop {
            let predicate = if self.peek() == &Tok::Word("a".into()) {
                self.bump();
                PatternTerm::Iri(RDF_TYPE.to_string())
            } else {
                self.term(false)?
            };
            loop {
                let object = self.term(true)?;
                out.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.peek() == &Tok::Punct(',') {
                    self.bump();
                } else {
                    break;
                }
            }
            if self.peek() != &Tok::Punct(';') {
                break;
            }
            while self.peek() == &Tok::Punct(';') {
                self.bump();
            }
            if matches!(self.peek(), Tok::Punct('.') | Tok::Punct('}')) {
                break;
            }
        }
        match self.peek() {
            Tok::Punct('.') => {
                self.bump();
                Ok(())
            }
            Tok::Punct('}') => Ok(()),
            _ if self.at_keyword("OPTIONAL") || self.at_keyword("FILTER") => Ok(()),
            _ => Err(self.error(&["'.'", "';'", "'}'"])),
        }
    }

    fn term(&mut self, literal_ok: bool) -> Result<PatternTerm, QueryError> {
        let expected: &[&str] = if literal_ok {
            &["a variable", "an IRI", "a literal"]
        } else {
            &["a variable", "an IRI"]
        };
        let t = match self.peek().clone() {
            Tok::Var(v) => PatternTerm::Var(v),
            Tok::Iri(i) => PatternTerm::Iri(i),
            Tok::Literal(s) if literal_ok => PatternTerm::Literal(s),
            Tok::Word(w) if w.contains(':') => {
                let (prefix, local) = w.split_once(':').expect("contains ':'");
                let iri = self
                    .prefixes
                    .expand(prefix, local)
                    .ok_or_else(|| QueryError::UnknownPrefix(prefix.to_string()))?;
                PatternTerm::Iri(iri)
            }
            _ => return Err(self.error(expected)),
        };
        self.bump();
        Ok(t)
    }
}

/// Parse query text, expanding `prefix:local` names with `prefixes`.
pub fn parse_query(text: &str, prefixes: &PrefixTable) -> Result<Query, QueryError> {
    let toks = lex(text)?;
    let mut p = Parser {
        src: text,
        toks,
        pos: 0,
        prefixes,
    };
    let q = p.query()?;
    q.check()?;
    Ok(q)
}
