#![allow(dead_code)]

use std::path::PathBuf;

use cdforge_core::notation::{parse_ntn, Assoc, Fixity, NotationDef, NotationTable};
use cdforge_core::om::OMObject;
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_file(kind: &str, stem: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(kind).join(format!("{stem}.{kind}"))).unwrap()
}

pub fn corpus_cd(stem: &str) -> String {
    std::fs::read_to_string(corpus_dir().join("cd").join(format!("{stem}.ocd"))).unwrap()
}

pub const CORPUS_CDS: [&str; 6] = ["arith1", "logic1", "nums1", "quant1", "relation1", "transc1"];

pub fn corpus_notations() -> Vec<NotationDef> {
    CORPUS_CDS
        .iter()
        .flat_map(|cd| parse_ntn(&corpus_file("ntn", cd)).unwrap())
        .collect()
}

/// The corpus notations plus a postfix operator and a word-glyph prefix, so
/// every fixity is exercised.
pub fn test_table() -> NotationTable {
    let mut defs = corpus_notations();
    defs.push(NotationDef::postfix("integer1", "factorial", "!", 900));
    defs.push(NotationDef::prefix("set1", "complement", "co", 650));
    defs.push(NotationDef::infix("set1", "in", "∈", 200, Assoc::None));
    defs.push(NotationDef::infix("fns1", "compose", "∘", 500, Assoc::Right));
    NotationTable::new(defs).unwrap()
}

const VARS: [&str; 10] = ["a", "b", "x", "y_1", "α", "co", "sin", "a.b", "n-1", "true"];

fn pick_var(rng: &mut impl Rng) -> String {
    VARS.choose(rng).unwrap().to_string()
}

fn leaf(rng: &mut impl Rng, table: &NotationTable) -> OMObject {
    match rng.gen_range(0..10) {
        0 => OMObject::Integer(BigInt::from(rng.gen_range(-1000i64..1000))),
        1 => OMObject::Integer(BigInt::from(rng.gen::<i64>()) * BigInt::from(rng.gen::<i64>())),
        2 => OMObject::Float(match rng.gen_range(0..4) {
            0 => f64::NAN,
            1 => f64::NEG_INFINITY,
            2 => rng.gen_range(-1e6..1e6),
            _ => rng.gen::<f64>() * 1e-9,
        }),
        3 => OMObject::Str(["", "hi", "a \"b\"\n", "∀"].choose(rng).unwrap().to_string()),
        4 => OMObject::Bytes((0..rng.gen_range(0..5)).map(|_| rng.gen()).collect()),
        5 | 6 => random_symbol(rng, table),
        _ => OMObject::Variable(pick_var(rng)),
    }
}

pub fn random_symbol(rng: &mut impl Rng, table: &NotationTable) -> OMObject {
    let defs = table.defs();
    if rng.gen_bool(0.15) {
        OMObject::sym(["set1", "my-cd"].choose(rng).unwrap().to_string(), ["in", "f.g", "plus"].choose(rng).unwrap().to_string())
    } else {
        let d = defs.choose(rng).unwrap();
        OMObject::sym(d.symbol.cd.clone(), d.symbol.name.clone())
    }
}

/// A random object of depth at most `depth` over the symbols of `table`
/// and a few unknown ones.
pub fn random_object(rng: &mut impl Rng, table: &NotationTable, depth: usize) -> OMObject {
    if depth <= 1 || rng.gen_bool(0.25) {
        return leaf(rng, table);
    }
    match rng.gen_range(0..10) {
        0..=6 => {
            let head = if rng.gen_bool(0.9) {
                random_symbol(rng, table)
            } else {
                random_object(rng, table, depth - 1)
            };
            let natural = match &head {
                OMObject::Symbol(s) => table.lookup(&s.cd, &s.name).map(|d| match d.fixity {
                    Fixity::Infix => 2,
                    Fixity::Prefix | Fixity::Postfix => 1,
                    _ => rng.gen_range(0..3),
                }),
                _ => None,
            };
            let n = match natural {
                Some(n) if rng.gen_bool(0.75) => n,
                _ => *[0usize, 1, 2, 3].choose(rng).unwrap(),
            };
            let mut els = vec![head];
            els.extend((0..n).map(|_| random_object(rng, table, depth - 1)));
            OMObject::Application(els)
        }
        _ => {
            let binder = match rng.gen_range(0..4) {
                0 => random_object(rng, table, depth - 1),
                1 => OMObject::sym("fns1", "lambda"),
                _ => OMObject::sym("quant1", *["forall", "exists"].choose(rng).unwrap()),
            };
            let mut vars: Vec<String> = VARS.iter().map(|v| v.to_string()).collect();
            vars.shuffle(rng);
            vars.truncate(rng.gen_range(0..4));
            OMObject::Binding {
                binder: Box::new(binder),
                bvars: vars,
                body: Box::new(random_object(rng, table, depth - 1)),
            }
        }
    }
}
