//! Text form of real inputs.
//!
//! ```text
//! rat:p/q
//! surd:(a+b*sqrt(d))/c[+k|-k]
//! dec:<decimal>@<bits>
//! sym:a0[,s0];[(a1,s1),(a2,s2),...][;per:[(a,s),...]]
//! ```

use rug::{Integer, Rational};

use super::{Ball, Quadratic, RealValue};
use crate::cf::{McfSymbol, Sign, SymbolStream};
use crate::error::{Error, Result};

fn parse_err(spec: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn parse_int(spec: &str, s: &str) -> Result<Integer> {
    let t = s.strip_prefix('+').unwrap_or(s);
    Integer::from_str_radix(t, 10).map_err(|_| parse_err(spec, format!("bad integer `{s}`")))
}

/// Parses an alpha-spec into a [`RealValue`].
pub fn parse_alpha(text: &str) -> Result<RealValue> {
    let spec: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| parse_err(text, "missing `kind:` prefix"))?;
    match kind {
        "rat" => parse_rat(text, body),
        "surd" => parse_surd(text, body),
        "dec" => parse_dec(text, body),
        "sym" => parse_sym(text, body),
        other => Err(parse_err(text, format!("unknown kind `{other}`"))),
    }
}

fn parse_rat(spec: &str, body: &str) -> Result<RealValue> {
    let (p, q) = match body.split_once('/') {
        Some((p, q)) => (parse_int(spec, p)?, parse_int(spec, q)?),
        None => (parse_int(spec, body)?, Integer::from(1)),
    };
    if q == 0 {
        return Err(parse_err(spec, "zero denominator"));
    }
    Ok(RealValue::Rational(Rational::from((p, q))))
}

fn parse_surd(spec: &str, body: &str) -> Result<RealValue> {
    let malformed = || parse_err(spec, "expected `(a+b*sqrt(d))/c`");
    let rest = body.strip_prefix('(').ok_or_else(malformed)?;
    let sqrt_pos = rest.find("*sqrt(").ok_or_else(malformed)?;
    let ab = &rest[..sqrt_pos];
    let after = &rest[sqrt_pos + "*sqrt(".len()..];
    let close = after.find(')').ok_or_else(malformed)?;
    let d = parse_int(spec, &after[..close])?;
    let tail = after[close + 1..].strip_prefix(')').ok_or_else(malformed)?;
    let split = ab
        .get(1..)
        .and_then(|t| t.rfind(['+', '-']))
        .map(|i| i + 1)
        .ok_or_else(malformed)?;
    let a = parse_int(spec, &ab[..split])?;
    let b = parse_int(spec, &ab[split..])?;
    // tail: `/c[+k|-k]` or `[+k|-k]`
    let (c, offset) = match tail.strip_prefix('/') {
        Some(r) => {
            let cut = r
                .get(1..)
                .and_then(|t| t.find(['+', '-']))
                .map(|i| i + 1)
                .unwrap_or(r.len());
            let k = if cut < r.len() {
                parse_int(spec, &r[cut..])?
            } else {
                Integer::new()
            };
            (parse_int(spec, &r[..cut])?, k)
        }
        None if tail.is_empty() => (Integer::from(1), Integer::new()),
        None => (Integer::from(1), parse_int(spec, tail)?),
    };
    let q = Quadratic::new(a, b, c, d)?;
    Ok(RealValue::from_quadratic(q.add_int(&offset)))
}

fn parse_dec(spec: &str, body: &str) -> Result<RealValue> {
    let (digits, bits) = body
        .split_once('@')
        .ok_or_else(|| parse_err(spec, "expected `@bits`"))?;
    let bits: u32 = bits.parse().map_err(|_| parse_err(spec, "bad bit count"))?;
    if bits < 64 {
        return Err(parse_err(spec, "at least 64 bits required"));
    }
    Ok(RealValue::BigBall(Ball::from_decimal(digits, bits)?))
}

fn parse_sign(spec: &str, s: &str) -> Result<Sign> {
    match s {
        "+" | "+1" | "1" => Ok(Sign::Plus),
        "-" | "-1" => Ok(Sign::Minus),
        _ => Err(parse_err(spec, format!("bad sign `{s}`"))),
    }
}

fn parse_symbol_list(spec: &str, list: &str) -> Result<Vec<McfSymbol>> {
    let inner = list
        .strip_prefix('[')
        .and_then(|l| l.strip_suffix(']'))
        .ok_or_else(|| parse_err(spec, "symbol list must be bracketed"))?;
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split("),")
        .map(|item| {
            let item = item.trim_start_matches('(').trim_end_matches(')');
            let (a, s) = item
                .split_once(',')
                .ok_or_else(|| parse_err(spec, format!("bad symbol `{item}`")))?;
            let a: u64 = a
                .parse()
                .map_err(|_| parse_err(spec, format!("bad entry `{a}`")))?;
            McfSymbol::new(a, parse_sign(spec, s)?)
        })
        .collect()
}

fn parse_sym(spec: &str, body: &str) -> Result<RealValue> {
    let mut parts = body.split(';');
    let head = parts.next().unwrap_or_default();
    let (a0, s0) = match head.split_once(',') {
        Some((a, s)) => (a, parse_sign(spec, s)?),
        None => (head, Sign::Plus),
    };
    let a0: i64 = a0.parse().map_err(|_| parse_err(spec, "bad a0"))?;
    let mut preperiod = Vec::new();
    let mut period = Vec::new();
    for part in parts {
        if let Some(p) = part.strip_prefix("per:") {
            period = parse_symbol_list(spec, p)?;
        } else {
            preperiod = parse_symbol_list(spec, part)?;
        }
    }
    Ok(RealValue::SymbolDefined(SymbolStream::new(
        a0, s0, preperiod, period,
    )))
}

fn symbol_list(symbols: &[McfSymbol]) -> String {
    let items: Vec<String> = symbols.iter().map(|s| s.to_string()).collect();
    format!("[{}]", items.join(","))
}

pub(super) fn format_alpha(x: &RealValue) -> String {
    match x {
        RealValue::Rational(r) => format!("rat:{}/{}", r.numer(), r.denom()),
        RealValue::QuadSurd(q) => format!("surd:{q}"),
        RealValue::BigBall(b) => {
            let digits = ((b.prec() as f64) * std::f64::consts::LOG10_2).ceil() as usize + 2;
            format!(
                "dec:{}@{}",
                b.center().to_string_radix(10, Some(digits)),
                b.prec()
            )
        }
        RealValue::SymbolDefined(s) => {
            let mut out = format!("sym:{}", s.a0);
            if s.s0 == Sign::Minus {
                out.push_str(",-");
            }
            out.push(';');
            out.push_str(&symbol_list(&s.preperiod));
            if !s.period.is_empty() {
                out.push_str(";per:");
                out.push_str(&symbol_list(&s.period));
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        assert_eq!(
            parse_alpha("rat:1/3").unwrap(),
            RealValue::rational(1, 3).unwrap()
        );
        let s2m1 = RealValue::surd(-1, 1, 1, 2).unwrap();
        assert_eq!(parse_alpha("surd:(0+1*sqrt(2))/1-1").unwrap(), s2m1);
        assert_eq!(parse_alpha("surd:(-1+1*sqrt(2))/1").unwrap(), s2m1);
        assert_eq!(
            parse_alpha("surd:(-1+1*sqrt(5))/2").unwrap(),
            RealValue::surd(-1, 1, 2, 5).unwrap()
        );
        let sym = parse_alpha("sym:0;[];per:[(2,+)]").unwrap();
        assert_eq!(sym.exact().unwrap(), s2m1.exact().unwrap());
        let g = parse_alpha("sym:1,-;[];per:[(3,-)]").unwrap();
        assert_eq!(
            g.exact().unwrap(),
            RealValue::surd(-1, 1, 2, 5).unwrap().exact().unwrap()
        );
        let dec = parse_alpha("dec:0.41421356237309504880@128").unwrap();
        assert!(matches!(dec, RealValue::BigBall(_)));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_alpha("foo:1").is_err());
        assert!(parse_alpha("rat:1/0").is_err());
        assert!(parse_alpha("sym:0;[(2,-)]").is_err());
        assert!(parse_alpha("dec:0.5@10").is_err());
    }

    #[test]
    fn formats_round_trip() {
        for text in [
            "rat:-3/7",
            "surd:(3-1*sqrt(5))/2",
            "sym:0;[(5,+)];per:[(2,+)]",
            "sym:2,-;[(3,-),(4,+)]",
        ] {
            let v = parse_alpha(text).unwrap();
            assert_eq!(v.to_spec(), text);
        }
    }
}
