//! Text inputs shared by the subcommands.

use mmwb_core::ncpoly::{parse_expression, parse_monomial, parse_polynomial};
use mmwb_core::{GaussRational, Monomial, Polynomial, Potential, Scalar};

use crate::CliError;

/// `"t=0.05,b=1/10"` as name/value pairs.
pub fn parse_couplings(text: &str) -> Result<Vec<(String, GaussRational)>, CliError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for piece in text.split(',') {
        let start = offset;
        offset += piece.len() + 1;
        if piece.trim().is_empty() {
            continue;
        }
        let (name, value) = piece.split_once('=').ok_or_else(|| CliError::Parse {
            pos: start,
            msg: format!("expected name=value, got `{}`", piece.trim()),
        })?;
        let name = name.trim();
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(CliError::Parse {
                pos: start,
                msg: format!("invalid coupling name `{name}`"),
            });
        }
        let vpos = start + piece.find('=').unwrap_or(0) + 1;
        let parsed = parse_expression(value).map_err(|e| shift(e.into(), vpos))?;
        let c = match parsed.terms.as_slice() {
            [] => GaussRational::integer(0),
            [t] if t.coupling.is_none() && t.word.is_unit() => t.coeff.clone(),
            _ => {
                return Err(CliError::Parse {
                    pos: vpos,
                    msg: format!("coupling value `{}` is not a number", value.trim()),
                })
            }
        };
        out.push((name.to_string(), c));
    }
    Ok(out)
}

fn shift(e: CliError, by: usize) -> CliError {
    match e {
        CliError::Parse { pos, msg } => CliError::Parse { pos: pos + by, msg },
        other => other,
    }
}

/// Parses `V`, checks that `Tr V` is real and assigns coupling values.
pub fn parse_potential<S: Scalar>(
    text: &str,
    colors: usize,
    couplings: &[(String, GaussRational)],
) -> Result<Potential<S>, CliError> {
    if text.trim().is_empty() {
        return Err(CliError::Parse {
            pos: 0,
            msg: "empty potential".into(),
        });
    }
    let mut v: Potential<S> = mmwb_core::ncpoly::parse_potential(text, colors)?;
    for (name, value) in couplings {
        v.set_value(name, value.clone())?;
    }
    Ok(v)
}

/// Whether every coupling of `v` has a value.
pub fn has_values<S: Scalar>(v: &Potential<S>) -> bool {
    v.couplings().iter().all(|c| c.value.is_some())
}

pub fn split_list(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

pub fn parse_words(text: &str) -> Result<Vec<Monomial>, CliError> {
    split_list(text).into_iter().map(|w| Ok(parse_monomial(w)?)).collect()
}

pub fn parse_polynomials<S: Scalar>(text: &str) -> Result<Vec<(String, Polynomial<S>)>, CliError> {
    split_list(text)
        .into_iter()
        .map(|p| Ok((p.to_string(), parse_polynomial::<S>(p)?)))
        .collect()
}

/// `"50,100,200"` as sizes.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>, CliError> {
    split_list(text)
        .into_iter()
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("`{s}` is not a matrix size")))
        })
        .collect()
}
