//! Text input and output: series literals and module files.
//!
//! A module file is line-oriented.  It opens with the header `phigamma v1`,
//! continues with `key = value` lines, then one matrix block per semilinear
//! operator:
//!
//! ```text
//! phigamma v1
//! p = 3
//! n = 2
//! f = 2
//! minpoly = 1,0,1
//! chi = 2
//! rank = 2
//! torsion = 2,1
//! phi:
//! (0,0): (g) + (7*g)*pi^1 + (3*g)*pi^2 + (5*g)*pi^3 + O(pi^4)
//! (1,1): 1
//! gamma:
//! (0,0): 5 + 4*pi^1 + 5*pi^2 + 4*pi^3 + O(pi^4)
//! (1,1): 1
//! ```
//!
//! `#` starts a comment, blank lines are skipped, omitted entries are zero,
//! and indices are 0-based.  `minpoly` (little-endian, leading coefficient
//! included) is required exactly when f > 1; `torsion` defaults to `n` in
//! every slot.  An optional `gammaprime:` block carries the extra operator
//! of the two-generator complex.  Series literals are ascending terms joined
//! by `+` or `-`: an integer, `pi^K`, `COEFF*pi^K`, or a parenthesized
//! polynomial in `g` in place of an integer coefficient, with an optional
//! trailing `O(pi^K)` precision marker.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::coeff::{CoeffElement, RingParams};
use crate::error::Error;
use crate::laurent::{ActionParams, LaurentElement};
use crate::module::PhiGammaModule;
use crate::Result;

// ---------------------------------------------------------------- formatting

/// Render a coefficient as a polynomial in `g`, e.g. `2*g^2+g+7` or `0`.
pub fn format_coeff(c: &CoeffElement) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (k, &v) in c.coeffs().iter().enumerate().rev() {
        if v == 0 {
            continue;
        }
        let part = match (k, v) {
            (0, v) => format!("{v}"),
            (1, 1) => "g".into(),
            (1, v) => format!("{v}*g"),
            (k, 1) => format!("g^{k}"),
            (k, v) => format!("{v}*g^{k}"),
        };
        parts.push(part);
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("+")
    }
}

/// Render a series in the literal grammar: ascending terms joined by `+`,
/// each `COEFF*pi^K`, `COEFF` (K = 0) or `pi^K` (coefficient 1), with
/// non-integer coefficients parenthesized, and a trailing `O(pi^K)` marker
/// for windowed elements, e.g. `pi^-1 + (g+1)*pi^2 + O(pi^5)`.
pub fn format_series(x: &LaurentElement) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (&i, c) in x.coeffs() {
        let cs = format_coeff(c);
        let is_int = !cs.contains('g');
        let coeff_lit = if is_int { cs.clone() } else { format!("({cs})") };
        let part = match (i, cs.as_str()) {
            (0, _) => coeff_lit,
            (i, "1") => format!("pi^{i}"),
            (i, _) => format!("{coeff_lit}*pi^{i}"),
        };
        parts.push(part);
    }
    if let Some(h) = x.prec() {
        parts.push(format!("O(pi^{})", h + 1));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Parsed module file: the Φ-Γ-module together with the optional extra
/// operator from a `gammaprime:` block.
#[derive(Clone, Debug)]
pub struct ModuleFile {
    pub module: PhiGammaModule,
    pub gammaprime: Option<Vec<Vec<LaurentElement>>>,
}

/// Render a module (and an optional third operator) in the file format.
/// Exactly-zero entries are omitted; everything else appears in row-major
/// order, so the output is canonical for a given module.
pub fn serialize_module(m: &PhiGammaModule, gammaprime: Option<&[Vec<LaurentElement>]>) -> String {
    let mut out = String::from("phigamma v1\n");
    let params = &m.params;
    out.push_str(&format!("p = {}\n", params.p()));
    out.push_str(&format!("n = {}\n", params.n()));
    out.push_str(&format!("f = {}\n", params.f()));
    if params.f() > 1 {
        let poly: Vec<String> = params.minpoly().iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("minpoly = {}\n", poly.join(",")));
    }
    out.push_str(&format!("chi = {}\n", m.act.a()));
    out.push_str(&format!("rank = {}\n", m.rank()));
    let tors: Vec<String> = m.torsion.iter().map(|t| t.to_string()).collect();
    out.push_str(&format!("torsion = {}\n", tors.join(",")));
    let mut block = |name: &str, mat: &[Vec<LaurentElement>]| {
        out.push_str(name);
        out.push_str(":\n");
        for (i, row) in mat.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if e.is_exact() && e.is_visibly_zero() {
                    continue;
                }
                out.push_str(&format!("({i},{j}): {}\n", format_series(e)));
            }
        }
    };
    block("phi", &m.phi);
    block("gamma", &m.gam);
    if let Some(gp) = gammaprime {
        block("gammaprime", gp);
    }
    out
}

// ---------------------------------------------------------------- series parsing

/// Character cursor with 1-based error positions.
struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
    col0: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str, line: usize, col0: usize) -> Self {
        Cursor { s: s.as_bytes(), pos: 0, line, col0 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.col0 + self.pos, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.s[self.pos..].starts_with(w.as_bytes()) {
            self.pos += w.len();
            true
        } else {
            false
        }
    }

    /// A signed decimal integer.
    fn integer(&mut self) -> Result<i64> {
        let neg = self.eat(b'-');
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        let v: i64 = digits
            .parse()
            .map_err(|_| self.err("number does not fit in 64 bits"))?;
        Ok(if neg { -v } else { v })
    }

    /// `pi` with an optional `^K`; returns the exponent.
    fn pi_exponent(&mut self) -> Result<i64> {
        if !self.eat_word("pi") {
            return Err(self.err("expected 'pi'"));
        }
        if self.eat(b'^') {
            self.integer()
        } else {
            Ok(1)
        }
    }

    /// A polynomial in `g` (inside parentheses): terms joined by `+`/`-`,
    /// each an integer, `g^k`, or `c*g^k`.
    fn g_poly(&mut self, params: &Arc<RingParams>) -> Result<CoeffElement> {
        let modulus = params.modulus() as i64;
        let mut coeffs: Vec<i64> = Vec::new();
        let mut sign = 1i64;
        loop {
            self.skip_ws();
            let (c, has_g) = match self.peek() {
                Some(ch) if ch.is_ascii_digit() || ch == b'-' => {
                    let v = self.integer()?;
                    if self.eat(b'*') {
                        self.expect(b'g')?;
                        (v, true)
                    } else if self.peek() == Some(b'g') {
                        return Err(self.err("write coefficient and g with a '*' between"));
                    } else {
                        (v, false)
                    }
                }
                Some(b'g') => {
                    self.pos += 1;
                    (1, true)
                }
                _ => return Err(self.err("expected a term in g")),
            };
            let k = if !has_g {
                0
            } else if self.eat(b'^') {
                let e = self.integer()?;
                if e < 0 {
                    return Err(self.err("negative powers of g are not allowed"));
                }
                e as usize
            } else {
                1
            };
            if coeffs.len() <= k {
                coeffs.resize(k + 1, 0);
            }
            coeffs[k] = (coeffs[k] + sign * (c % modulus)).rem_euclid(modulus);
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1;
                }
                _ => break,
            }
        }
        let reduced: Vec<u64> = coeffs.iter().map(|&v| v as u64).collect();
        Ok(CoeffElement::from_poly(params, &reduced))
    }

    /// One series term; `None` marks the `O(pi^K)` tail, which returns the
    /// precision K−1.
    fn term(
        &mut self,
        params: &Arc<RingParams>,
        negated: bool,
    ) -> Result<TermOrMarker> {
        if self.s[self.pos..].starts_with(b"O(") {
            if negated {
                return Err(self.err("a precision marker cannot be negated"));
            }
            self.pos += 2;
            self.skip_ws();
            let k = self.pi_exponent()?;
            self.skip_ws();
            self.expect(b')')?;
            return Ok(TermOrMarker::Marker(k - 1));
        }
        let coeff;
        let mut exponent = 0i64;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                coeff = self.g_poly(params)?;
                self.skip_ws();
                self.expect(b')')?;
                if self.eat(b'*') {
                    exponent = self.pi_exponent()?;
                }
            }
            Some(b'p') => {
                coeff = CoeffElement::one(params);
                exponent = self.pi_exponent()?;
            }
            Some(c) if c.is_ascii_digit() || c == b'-' => {
                let v = self.integer()?;
                coeff = CoeffElement::from_int(params, v);
                if self.eat(b'*') {
                    exponent = self.pi_exponent()?;
                }
            }
            _ => return Err(self.err("expected a series term")),
        }
        let c = if negated { coeff.neg() } else { coeff };
        Ok(TermOrMarker::Term(exponent, c))
    }
}

enum TermOrMarker {
    Term(i64, CoeffElement),
    Marker(i64),
}

fn parse_series_at(
    params: &Arc<RingParams>,
    s: &str,
    line: usize,
    col0: usize,
) -> Result<LaurentElement> {
    let mut cur = Cursor::new(s, line, col0);
    let mut terms: BTreeMap<i64, CoeffElement> = BTreeMap::new();
    let mut prec: Option<i64> = None;
    let mut negated = false;
    loop {
        cur.skip_ws();
        match cur.term(params, negated)? {
            TermOrMarker::Term(k, c) => {
                let slot = terms.entry(k).or_insert_with(|| CoeffElement::zero(params));
                *slot = slot.add(&c);
            }
            TermOrMarker::Marker(h) => {
                prec = Some(h);
                cur.skip_ws();
                if cur.peek().is_some() {
                    return Err(cur.err("the precision marker must come last"));
                }
                break;
            }
        }
        cur.skip_ws();
        match cur.peek() {
            None => break,
            Some(b'+') => {
                cur.pos += 1;
                negated = false;
            }
            Some(b'-') => {
                cur.pos += 1;
                negated = true;
            }
            Some(_) => return Err(cur.err("expected '+', '-' or end of series")),
        }
    }
    let mut acc = LaurentElement::zero(params);
    for (k, c) in terms {
        acc = acc.add(&LaurentElement::monomial(params, k, c));
    }
    Ok(match prec {
        Some(h) => acc.truncated(h),
        None => acc,
    })
}

/// Parse a series literal, e.g. `pi^-1 + (g+1)*pi^2 + O(pi^5)`.
pub fn parse_series(params: &Arc<RingParams>, s: &str) -> Result<LaurentElement> {
    parse_series_at(params, s, 1, 1)
}

// ---------------------------------------------------------------- module file parsing

fn key_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col: 1, msg: msg.into() }
}

fn parse_uints(s: &str, line: usize, what: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| key_err(line, format!("{what} must be a comma-separated list of numbers")))
        })
        .collect()
}

/// Parse a module file; see the module documentation for the format.  The
/// resulting module has been validated (étale Φ, commutation), so a
/// successful parse is a usable module.
pub fn parse_module(text: &str) -> Result<ModuleFile> {
    let mut keys: BTreeMap<&str, (String, usize)> = BTreeMap::new();
    let mut blocks: Vec<(String, usize, Vec<(usize, String)>)> = Vec::new();
    let mut saw_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let lno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        if !saw_header {
            if trimmed != "phigamma v1" {
                return Err(key_err(lno, "expected the header line 'phigamma v1'"));
            }
            saw_header = true;
            continue;
        }
        if let Some(name) = trimmed.strip_suffix(':') {
            if name.contains('(') {
                // entry line missing its block? fall through to the entry arm
            } else {
                let name = name.trim();
                if !matches!(name, "phi" | "gamma" | "gammaprime") {
                    return Err(key_err(lno, format!("unknown block '{name}'")));
                }
                if blocks.iter().any(|(b, _, _)| b == name) {
                    return Err(key_err(lno, format!("duplicate block '{name}'")));
                }
                blocks.push((name.to_string(), lno, Vec::new()));
                continue;
            }
        }
        if trimmed.starts_with('(') {
            match blocks.last_mut() {
                Some((_, _, entries)) => entries.push((lno, line.to_string())),
                None => {
                    return Err(key_err(lno, "matrix entry before any 'phi:'/'gamma:' block"))
                }
            }
            continue;
        }
        if let Some((k, v)) = trimmed.split_once('=') {
            if !blocks.is_empty() {
                return Err(key_err(lno, "keys must come before the matrix blocks"));
            }
            let k = k.trim();
            let known = ["p", "n", "f", "minpoly", "chi", "rank", "torsion"];
            if !known.contains(&k) {
                return Err(key_err(lno, format!("unknown key '{k}'")));
            }
            let slot = *known.iter().find(|&&x| x == k).unwrap();
            if keys.insert(slot, (v.trim().to_string(), lno)).is_some() {
                return Err(key_err(lno, format!("duplicate key '{k}'")));
            }
            continue;
        }
        return Err(key_err(lno, "expected 'key = value', a block header, or '(i,j): series'"));
    }

    if !saw_header {
        return Err(key_err(1, "empty input; expected the header line 'phigamma v1'"));
    }

    let uint_key = |name: &str| -> Result<u64> {
        let (v, lno) = keys
            .get(name)
            .ok_or_else(|| key_err(1, format!("missing required key '{name}'")))?;
        v.parse::<u64>().map_err(|_| key_err(*lno, format!("'{name}' must be a number")))
    };
    let p = uint_key("p")?;
    let n = uint_key("n")? as u32;
    let f = uint_key("f")? as usize;
    let chi = uint_key("chi")?;
    let rank = uint_key("rank")? as usize;
    let minpoly = match keys.get("minpoly") {
        Some((v, lno)) => Some(parse_uints(v, *lno, "minpoly")?),
        None => None,
    };
    let params = RingParams::new(p, n, f, minpoly)
        .map_err(|e| key_err(1, format!("invalid ring parameters: {e}")))?;
    let act = ActionParams::new(chi, p).map_err(|e| key_err(1, format!("invalid chi: {e}")))?;
    let torsion = match keys.get("torsion") {
        Some((v, lno)) => {
            let t = parse_uints(v, *lno, "torsion")?;
            if t.len() != rank {
                return Err(key_err(*lno, format!("torsion lists {} slots for rank {rank}", t.len())));
            }
            if t.iter().any(|&x| x == 0 || x > n as u64) {
                return Err(key_err(*lno, format!("torsion exponents must lie in 1..={n}")));
            }
            t.iter().map(|&x| x as u32).collect()
        }
        None => vec![n; rank],
    };

    let mut mats: BTreeMap<String, Vec<Vec<LaurentElement>>> = BTreeMap::new();
    for (name, _lno, entries) in &blocks {
        let mut mat = vec![vec![LaurentElement::zero(&params); rank]; rank];
        let mut seen: Vec<(usize, usize)> = Vec::new();
        for (lno, line) in entries {
            let mut cur = Cursor::new(line, *lno, 1);
            cur.skip_ws();
            cur.expect(b'(')?;
            cur.skip_ws();
            let i = cur.integer()?;
            cur.skip_ws();
            cur.expect(b',')?;
            cur.skip_ws();
            let j = cur.integer()?;
            cur.skip_ws();
            cur.expect(b')')?;
            cur.skip_ws();
            cur.expect(b':')?;
            if i < 0 || j < 0 || i as usize >= rank || j as usize >= rank {
                return Err(Error::Parse {
                    line: *lno,
                    col: 1,
                    msg: format!("entry ({i},{j}) is outside a rank-{rank} matrix"),
                });
            }
            let (i, j) = (i as usize, j as usize);
            if seen.contains(&(i, j)) {
                return Err(Error::Parse {
                    line: *lno,
                    col: 1,
                    msg: format!("duplicate entry ({i},{j})"),
                });
            }
            seen.push((i, j));
            let col0 = cur.pos + 1;
            let rest = std::str::from_utf8(&cur.s[cur.pos..]).unwrap();
            mat[i][j] = parse_series_at(&params, rest, *lno, col0)?;
        }
        mats.insert(name.clone(), mat);
    }

    let phi = mats
        .remove("phi")
        .ok_or_else(|| key_err(1, "missing required block 'phi:'"))?;
    let gam = mats
        .remove("gamma")
        .ok_or_else(|| key_err(1, "missing required block 'gamma:'"))?;
    let gammaprime = mats.remove("gammaprime");
    let module = PhiGammaModule::new(&params, act, torsion, phi, gam)?;
    Ok(ModuleFile { module, gammaprime })
}

// ----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::default_entry_prec;

    fn params(p: u64, n: u32) -> Arc<RingParams> {
        RingParams::new(p, n, 1, None).expect("ring")
    }

    #[test]
    fn series_literals_round_trip() {
        let params = RingParams::new(3, 2, 2, Some(vec![2, 2, 1])).expect("ring");
        let cases = [
            "0",
            "1",
            "pi^-1",
            "2*pi^3",
            "(g+1)*pi^2",
            "(2*g^2+g+7)",
            "pi^-1 + (g+1)*pi^2 + O(pi^5)",
            "8 + pi^1",
        ];
        for src in cases {
            let x = parse_series(&params, src).unwrap_or_else(|e| panic!("{src}: {e}"));
            let printed = format_series(&x);
            let y = parse_series(&params, &printed).expect("reparse");
            assert!(
                x.agrees_with(&y, 2) && x.prec() == y.prec(),
                "{src} printed as {printed} but did not round-trip"
            );
        }
    }

    #[test]
    fn subtraction_and_folding_are_accepted() {
        let params = params(3, 2);
        let x = parse_series(&params, "1 - pi + 2*pi").expect("parse");
        assert_eq!(format_series(&x), "1 + pi^1");
        let y = parse_series(&params, "-1").expect("parse");
        assert_eq!(format_series(&y), "8");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let params = params(3, 1);
        match parse_series(&params, "1 + O(pi^3) + 1") {
            Err(Error::Parse { line: 1, col, .. }) => assert!(col > 10, "col = {col}"),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_series(&params, "1 + + 2") {
            Err(Error::Parse { col: 5, .. }) => {}
            other => panic!("expected a parse error at the stray '+', got {other:?}"),
        }
    }

    #[test]
    fn module_files_round_trip() {
        let params = params(3, 2);
        let act = ActionParams::new(2, 3).expect("action");
        let m = PhiGammaModule::cyclotomic_twist(&params, act, 1, Some(default_entry_prec(&params)))
            .expect("twist");
        let text = serialize_module(&m, None);
        let parsed = parse_module(&text).expect("parse");
        assert_eq!(serialize_module(&parsed.module, None), text, "canonical form is stable");
        assert!(parsed.gammaprime.is_none());
    }

    #[test]
    fn module_files_carry_the_optional_third_operator() {
        let params = params(3, 1);
        let act = ActionParams::new(2, 3).expect("action");
        let m = PhiGammaModule::trivial(&params, act);
        let gp = vec![vec![LaurentElement::one(&params)]];
        let text = serialize_module(&m, Some(&gp));
        let parsed = parse_module(&text).expect("parse");
        let back = parsed.gammaprime.expect("gammaprime survives");
        assert!(back[0][0].agrees_with(&LaurentElement::one(&params), 1));
        assert_eq!(serialize_module(&parsed.module, Some(&back)), text);
    }

    #[test]
    fn file_errors_are_specific() {
        let bad_header = "phigamma v2\np = 3\n";
        assert!(matches!(parse_module(bad_header), Err(Error::Parse { line: 1, .. })));

        let no_phi = "phigamma v1\np = 3\nn = 1\nf = 1\nchi = 2\nrank = 1\ngamma:\n(0,0): 1\n";
        match parse_module(no_phi) {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("phi"), "{msg}"),
            other => panic!("expected a missing-block error, got {other:?}"),
        }

        let out_of_range =
            "phigamma v1\np = 3\nn = 1\nf = 1\nchi = 2\nrank = 1\nphi:\n(0,1): 1\ngamma:\n(0,0): 1\n";
        match parse_module(out_of_range) {
            Err(Error::Parse { line: 8, msg, .. }) => assert!(msg.contains("outside"), "{msg}"),
            other => panic!("expected an out-of-range error, got {other:?}"),
        }

        let dup = "phigamma v1\np = 3\np = 5\n";
        assert!(matches!(parse_module(dup), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn parsed_modules_are_validated() {
        // Φ = 0 is not étale, so the parse must fail with a module error,
        // not a parse error
        let zero_phi =
            "phigamma v1\np = 3\nn = 1\nf = 1\nchi = 2\nrank = 1\nphi:\ngamma:\n(0,0): 1\n";
        match parse_module(zero_phi) {
            Err(Error::NotEtale(_)) => {}
            other => panic!("expected an étale failure, got {other:?}"),
        }
    }
}
