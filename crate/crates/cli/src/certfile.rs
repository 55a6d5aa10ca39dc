//! The textual certificate format.
//!
//! Line-oriented UTF-8 key/value records. Rationals are written `p/q` in
//! lowest terms with the sign on the numerator; exponent vectors are
//! space-separated integers. The format round-trips losslessly, and for
//! identical inputs the writer produces byte-identical files (the optional
//! `created` stamp is emitted only when `SOURCE_DATE_EPOCH` is set).
//!
//! ```text
//! rsos-certificate v1
//! kind farkas                  # or: obstruction
//! n 2
//! e 0
//! order grlex
//! basis sparse                 # or: dense
//! f x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1
//! g x1^2 + 1                   # rational-function case only
//! terms all-terms-deg<=0       # or one `term <exp>` line per member
//! numbasis 0 0
//! y 2 2 300/1                  # farkas: one line per moment entry
//! witness 1 0                  # obstruction: the witness exponent
//! meta digits 30
//! meta big-m 4000000/1
//! meta seed 0
//! meta blend-t 0/1
//! meta den-bound 1000
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use rsos_core::poly::{parse_polynomial, terms_up_to, Exponent, Polynomial, TermSet};
use rsos_core::rationalize::{CertBody, Certificate, Fingerprint, Provenance};
use rsos_core::sdp::MomentVector;
use rsos_core::Rat;

pub const HEADER: &str = "rsos-certificate v1";

#[derive(Debug, Error)]
#[error("certificate file, line {line}: {message}")]
pub struct CertFileError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> CertFileError {
    CertFileError {
        line,
        message: message.into(),
    }
}

fn format_rat(v: &Rat) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

fn format_exp(e: &Exponent) -> String {
    e.entries()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_certificate(cert: &Certificate) -> String {
    let fp = &cert.fingerprint;
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let kind = match &cert.body {
        CertBody::Farkas { .. } => "farkas",
        CertBody::SupportObstruction { .. } => "obstruction",
    };
    let _ = writeln!(out, "kind {kind}");
    let _ = writeln!(out, "n {}", fp.n);
    let _ = writeln!(out, "e {}", fp.e);
    let _ = writeln!(out, "order {}", fp.order);
    let _ = writeln!(
        out,
        "basis {}",
        if fp.sparse_basis { "sparse" } else { "dense" }
    );
    let _ = writeln!(out, "f {}", fp.f);
    if let Some(g) = &fp.g {
        let _ = writeln!(out, "g {g}");
    }
    if fp.denominator_terms == terms_up_to(fp.n, fp.e) {
        let _ = writeln!(out, "terms all-terms-deg<={}", fp.e);
    } else {
        for t in fp.denominator_terms.iter() {
            let _ = writeln!(out, "term {}", format_exp(t));
        }
    }
    for b in &fp.numerator_basis {
        let _ = writeln!(out, "numbasis {}", format_exp(b));
    }
    match &cert.body {
        CertBody::Farkas { y_hat } => {
            for (e, v) in y_hat.iter() {
                let _ = writeln!(out, "y {} {}", format_exp(e), format_rat(v));
            }
        }
        CertBody::SupportObstruction { witness } => {
            let _ = writeln!(out, "witness {}", format_exp(witness));
        }
    }
    let prov = &cert.provenance;
    let _ = writeln!(out, "meta digits {}", prov.solver_digits);
    let _ = writeln!(out, "meta big-m {}", format_rat(&prov.big_m));
    let _ = writeln!(out, "meta seed {}", prov.seed);
    let _ = writeln!(out, "meta blend-t {}", format_rat(&prov.blend_t));
    let _ = writeln!(out, "meta den-bound {}", prov.denominator_bound);
    if let Some(created) = prov.created_unix {
        let _ = writeln!(out, "meta created {created}");
    }
    out
}

pub fn parse_certificate(text: &str) -> Result<Certificate, CertFileError> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(err(1, "empty file".to_string()));
    };
    if header.trim() != HEADER {
        return Err(err(1, format!("expected header {HEADER:?}")));
    }

    struct Raw<'a> {
        line: usize,
        key: &'a str,
        rest: &'a str,
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, rest) = trimmed.split_once(' ').unwrap_or((trimmed, ""));
        records.push(Raw {
            line: line_no,
            key,
            rest: rest.trim(),
        });
    }

    let find_unique = |key: &str| -> Result<(usize, &str), CertFileError> {
        let mut hits = records.iter().filter(|r| r.key == key);
        let first = hits
            .next()
            .ok_or_else(|| err(0, format!("missing required field {key:?}")))?;
        if hits.next().is_some() {
            return Err(err(first.line, format!("duplicate field {key:?}")));
        }
        Ok((first.line, first.rest))
    };

    let (kline, kind) = find_unique("kind")?;
    if kind != "farkas" && kind != "obstruction" {
        return Err(err(kline, format!("unknown kind {kind:?}")));
    }
    let (nline, nstr) = find_unique("n")?;
    let n: usize = nstr
        .parse()
        .map_err(|_| err(nline, "n must be a positive integer"))?;
    if n == 0 {
        return Err(err(nline, "n must be at least 1"));
    }
    let (eline, estr) = find_unique("e")?;
    let e: u32 = estr
        .parse()
        .map_err(|_| err(eline, "e must be a nonnegative integer"))?;
    let (oline, order) = find_unique("order")?;
    if order != "grlex" {
        return Err(err(oline, format!("unsupported monomial order {order:?}")));
    }
    let (bline, basis_tag) = find_unique("basis")?;
    let sparse_basis = match basis_tag {
        "sparse" => true,
        "dense" => false,
        other => return Err(err(bline, format!("unknown basis tag {other:?}"))),
    };
    let (fline, ftext) = find_unique("f")?;
    let f = parse_polynomial(ftext, n).map_err(|pe| err(fline, format!("bad polynomial: {pe}")))?;
    if f.is_zero() {
        return Err(err(fline, "f must be nonzero"));
    }
    let g: Option<Polynomial> = match records.iter().find(|r| r.key == "g") {
        None => None,
        Some(r) => Some(
            parse_polynomial(r.rest, n).map_err(|pe| err(r.line, format!("bad polynomial: {pe}")))?,
        ),
    };

    let parse_exp = |line: usize, text: &str| -> Result<Exponent, CertFileError> {
        let entries: Result<Vec<u32>, _> = text.split_whitespace().map(|w| w.parse()).collect();
        let entries = entries.map_err(|_| err(line, "exponent entries must be integers"))?;
        if entries.len() != n {
            return Err(err(
                line,
                format!("exponent has {} entries, expected {n}", entries.len()),
            ));
        }
        Ok(Exponent::new(entries))
    };

    let all_terms_tag = records
        .iter()
        .find(|r| r.key == "terms")
        .map(|r| (r.line, r.rest));
    let term_lines: Vec<&Raw> = records.iter().filter(|r| r.key == "term").collect();
    let denominator_terms = match (all_terms_tag, term_lines.is_empty()) {
        (Some((line, tag)), true) => {
            let expect = format!("all-terms-deg<={e}");
            if tag != expect {
                return Err(err(line, format!("terms tag {tag:?}, expected {expect:?}")));
            }
            terms_up_to(n, e)
        }
        (None, false) => {
            let mut exps = Vec::new();
            for r in &term_lines {
                exps.push(parse_exp(r.line, r.rest)?);
            }
            TermSet::from_exponents(n, exps).map_err(|e| err(0, e.to_string()))?
        }
        (Some((line, _)), false) => {
            return Err(err(line, "cannot mix a terms tag with explicit term lines"))
        }
        (None, true) => return Err(err(0, "missing denominator terms (terms/term lines)")),
    };
    if denominator_terms.max_degree() != Some(e) {
        return Err(err(
            eline,
            format!(
                "e is {e} but the denominator terms have maximum degree {:?}",
                denominator_terms.max_degree()
            ),
        ));
    }

    let mut numerator_basis = Vec::new();
    for r in records.iter().filter(|r| r.key == "numbasis") {
        numerator_basis.push(parse_exp(r.line, r.rest)?);
    }
    if numerator_basis.is_empty() {
        return Err(err(0, "missing numerator basis (numbasis lines)"));
    }

    let body = if kind == "farkas" {
        let mut y_hat = MomentVector::new(n);
        for r in records.iter().filter(|r| r.key == "y") {
            let mut parts = r.rest.rsplitn(2, ' ');
            let value_text = parts
                .next()
                .ok_or_else(|| err(r.line, "y line needs an exponent and a value"))?;
            let exp_text = parts
                .next()
                .ok_or_else(|| err(r.line, "y line needs an exponent and a value"))?;
            let exp = parse_exp(r.line, exp_text)?;
            let value = Rat::from_str(value_text)
                .map_err(|_| err(r.line, format!("bad rational {value_text:?}")))?;
            if y_hat.contains(&exp) {
                return Err(err(r.line, format!("duplicate moment entry for {exp}")));
            }
            y_hat.insert(exp, value);
        }
        if y_hat.is_empty() {
            return Err(err(0, "farkas certificate has no y entries"));
        }
        CertBody::Farkas { y_hat }
    } else {
        let (wline, wtext) = find_unique("witness")?;
        CertBody::SupportObstruction {
            witness: parse_exp(wline, wtext)?,
        }
    };

    let meta = |name: &str| -> Option<(usize, &str)> {
        records
            .iter()
            .find(|r| r.key == "meta" && r.rest.split_whitespace().next() == Some(name))
            .map(|r| (r.line, r.rest.split_once(' ').map(|(_, v)| v.trim()).unwrap_or("")))
    };
    let mut provenance = Provenance::new(0, Rat::zero(), 0);
    if let Some((line, v)) = meta("digits") {
        provenance.solver_digits = v.parse().map_err(|_| err(line, "bad digits value"))?;
    }
    if let Some((line, v)) = meta("big-m") {
        provenance.big_m = Rat::from_str(v).map_err(|_| err(line, "bad big-m value"))?;
    }
    if let Some((line, v)) = meta("seed") {
        provenance.seed = v.parse().map_err(|_| err(line, "bad seed value"))?;
    }
    if let Some((line, v)) = meta("blend-t") {
        provenance.blend_t = Rat::from_str(v).map_err(|_| err(line, "bad blend-t value"))?;
    }
    if let Some((line, v)) = meta("den-bound") {
        provenance.denominator_bound =
            BigUint::from_str(v).map_err(|_| err(line, "bad den-bound value"))?;
    }
    if let Some((line, v)) = meta("created") {
        provenance.created_unix = Some(v.parse().map_err(|_| err(line, "bad created value"))?);
    }

    Ok(Certificate {
        fingerprint: Fingerprint {
            n,
            e,
            f,
            g,
            denominator_terms,
            sparse_basis,
            numerator_basis,
            order: order.to_string(),
        },
        body,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use rsos_core::poly::motzkin;
    use rsos_core::sdp::assemble_polynomial_instance;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    fn paper_motzkin_cert() -> Certificate {
        let t = TermSet::from_exponents(2, [Exponent::zeros(2)]).unwrap();
        let inst = assemble_polynomial_instance(&motzkin(), &t, true).unwrap();
        let mut y = MomentVector::new(2);
        for e in inst.constraint_monomials.iter() {
            let v = if e == &Exponent::new(vec![2, 2]) {
                rat(300, 1)
            } else {
                Rat::zero()
            };
            y.insert(e.clone(), v);
        }
        let mut prov = Provenance::new(30, rat(4_000_000, 1), 7);
        prov.blend_t = rat(1, 8);
        prov.denominator_bound = BigUint::from(1000u32);
        Certificate {
            fingerprint: Fingerprint::of_instance(&inst),
            body: CertBody::Farkas { y_hat: y },
            provenance: prov,
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let cert = paper_motzkin_cert();
        let text = write_certificate(&cert);
        let back = parse_certificate(&text).unwrap();
        assert_eq!(back, cert);
        // and printing again is byte-identical
        assert_eq!(write_certificate(&back), text);
    }

    #[test]
    fn obstruction_round_trip() {
        let f = parse_polynomial("x1", 2).unwrap();
        let g = parse_polynomial("x2^2", 2).unwrap();
        let t = TermSet::from_exponents(2, [Exponent::zeros(2)]).unwrap();
        let cert = Certificate {
            fingerprint: Fingerprint::for_rational_obstruction(&f, &g, &t),
            body: CertBody::SupportObstruction {
                witness: Exponent::new(vec![1, 0]),
            },
            provenance: Provenance::new(30, rat(1_000_000, 1), 0),
        };
        let text = write_certificate(&cert);
        let back = parse_certificate(&text).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn truncated_and_malformed_files_are_rejected() {
        let cert = paper_motzkin_cert();
        let text = write_certificate(&cert);
        // drop the last 3 lines (meta + a y line boundary)
        let truncated: Vec<&str> = text.lines().collect();
        let cut = truncated[..truncated.len() / 2].join("\n");
        // may fail on missing fields or missing moments; either way it must
        // not parse into a full certificate silently
        let result = parse_certificate(&cut);
        if let Ok(cert) = result {
            // if it parsed structurally, the moment map must be incomplete
            let CertBody::Farkas { y_hat } = cert.body else {
                panic!("unexpected body");
            };
            assert!(y_hat.len() < 10);
        }
        assert!(parse_certificate("garbage\n").is_err());
        assert!(parse_certificate("").is_err());
        let bad_header = text.replacen(HEADER, "rsos-certificate v9", 1);
        assert!(parse_certificate(&bad_header).is_err());
        let bad_rat = text.replace("300/1", "300/abc");
        assert!(parse_certificate(&bad_rat).is_err());
    }

    #[test]
    fn rationals_are_lowest_terms_with_sign_on_numerator() {
        assert_eq!(format_rat(&rat(-6, 8)), "-3/4");
        assert_eq!(format_rat(&rat(300, 1)), "300/1");
    }
}
