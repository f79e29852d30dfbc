/// XML NCName check (no colon), as required for CD, symbol and variable names.
pub fn is_ncname(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_name_start(c) => chars.all(is_name_char),
        _ => false,
    }
}

fn is_name_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_name_char(c: char) -> bool {
    is_name_start(c) || c.is_numeric() || matches!(c, '-' | '.' | '\u{B7}')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ncnames() {
        assert!(is_ncname("arith1"));
        assert!(is_ncname("unary_minus"));
        assert!(is_ncname("interval_oo"));
        assert!(is_ncname("a.b-c"));
        assert!(!is_ncname(""));
        assert!(!is_ncname("bad name"));
        assert!(!is_ncname("1abc"));
        assert!(!is_ncname("cd:x"));
    }
}
