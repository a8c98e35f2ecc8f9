//! File formats: valuations, markets, product spaces, and report output.
//!
//! Rationals travel as strings ("3/4", "2", "0.125") and are parsed exactly;
//! no value passes through binary64 on the way in. Every parse failure names
//! the offending field with an index path so a bad entry in a long table is
//! findable.

use std::fmt;
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use qpart_core::concentration::ProductSpace;
use qpart_core::posted::{MarketInstance, PostedError};
use qpart_core::setfn::{generate, GeneratorSpec, Valuation};
use qpart_core::{rat_int, Rat};

/// A rejected input: which field, and why. Always exits with code 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError {
    /// Path of the offending field, e.g. `values[3]` or `generator.top`.
    pub field: String,
    /// What was wrong with it.
    pub message: String,
}

impl InputError {
    /// Builds an error for `field` with the given message.
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        InputError { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for InputError {}

/// Parses a rational from `a/b`, integer, or finite-decimal notation,
/// exactly. Reports failures against `field`.
pub fn parse_rat(text: &str, field: &str) -> Result<Rat, InputError> {
    let t = text.trim();
    let bad = |message: String| InputError::new(field, message);
    if t.is_empty() {
        return Err(bad("empty rational".into()));
    }
    if let Some((n, d)) = t.split_once('/') {
        let numer: BigInt = n
            .trim()
            .parse()
            .map_err(|_| bad(format!("invalid numerator in '{t}'")))?;
        let denom: BigInt = d
            .trim()
            .parse()
            .map_err(|_| bad(format!("invalid denominator in '{t}'")))?;
        if denom == BigInt::from(0) {
            return Err(bad(format!("denominator is zero in '{t}'")));
        }
        return Ok(Rat::new(numer, denom));
    }
    let (negative, digits) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    if let Some((whole, frac)) = digits.split_once('.') {
        let all_digits =
            |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(whole) || !all_digits(frac) {
            return Err(bad(format!("not a rational number: '{t}'")));
        }
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let numer: BigInt = whole.parse::<BigInt>().expect("digits") * &scale
            + frac.parse::<BigInt>().expect("digits");
        let value = Rat::new(numer, scale);
        return Ok(if negative { -value } else { value });
    }
    t.parse::<BigInt>()
        .map(Rat::from_integer)
        .map_err(|_| bad(format!("not a rational number: '{t}'")))
}

/// Parses a rational and rejects anything outside `[0, 1]`.
pub fn parse_probability(text: &str, field: &str) -> Result<Rat, InputError> {
    let p = parse_rat(text, field)?;
    if p < rat_int(0) || p > rat_int(1) {
        return Err(InputError::new(field, format!("probability {p} outside [0, 1]")));
    }
    Ok(p)
}

/// On-disk valuation: either an explicit value table or a generator call.
#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationFile {
    /// Ground set size, required with `values`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Value table as fraction strings, indexed by subset bitmask.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
    /// Generator call, exclusive with `values`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorFile>,
}

/// On-disk form of [`GeneratorSpec`].
#[derive(Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorFile {
    /// `gen_threshold(m, top)`.
    Threshold {
        /// Ground set size.
        m: u32,
        /// Full-set value in `[1, 2]`.
        top: String,
    },
    /// `gen_setcover_f2(a)`.
    SetcoverF2 {
        /// Vector-space dimension.
        a: u32,
    },
    /// `gen_xos(m, clauses)`.
    Xos {
        /// Ground set size.
        m: u32,
        /// Additive clauses, one weight string per item.
        clauses: Vec<Vec<String>>,
    },
    /// `gen_binomial_floor(m, k)`.
    BinomialFloor {
        /// Ground set size.
        m: u32,
        /// Binomial rank.
        k: u32,
    },
    /// `gen_random_subadditive(m, seed)`.
    RandomSubadditive {
        /// Ground set size.
        m: u32,
        /// Draw seed.
        seed: u64,
    },
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, InputError> {
    let text = fs::read_to_string(path)
        .map_err(|e| InputError::new(path.display().to_string(), e.to_string()))?;
    serde_json::from_str(&text)
        .map_err(|e| InputError::new(path.display().to_string(), e.to_string()))
}

fn valuation_from_parts(file: ValuationFile, path: &Path) -> Result<Valuation, InputError> {
    match (file.values, file.generator) {
        (Some(values), None) => {
            let m = file.m.ok_or_else(|| {
                InputError::new("m", "required alongside values")
            })?;
            let mut table = Vec::with_capacity(values.len());
            for (i, text) in values.iter().enumerate() {
                table.push(parse_rat(text, &format!("values[{i}]"))?);
            }
            Valuation::new(m, table).map_err(|e| InputError::new("values", e.to_string()))
        }
        (None, Some(generator)) => {
            let spec = match generator {
                GeneratorFile::Threshold { m, top } => GeneratorSpec::Threshold {
                    m,
                    top: parse_rat(&top, "generator.top")?,
                },
                GeneratorFile::SetcoverF2 { a } => GeneratorSpec::SetcoverF2 { a },
                GeneratorFile::Xos { m, clauses } => {
                    let mut parsed = Vec::with_capacity(clauses.len());
                    for (ci, clause) in clauses.iter().enumerate() {
                        let mut weights = Vec::with_capacity(clause.len());
                        for (wi, text) in clause.iter().enumerate() {
                            weights.push(parse_rat(
                                text,
                                &format!("generator.clauses[{ci}][{wi}]"),
                            )?);
                        }
                        parsed.push(weights);
                    }
                    GeneratorSpec::XosClauses { m, clauses: parsed }
                }
                GeneratorFile::BinomialFloor { m, k } => {
                    GeneratorSpec::BinomialFloor { m, k }
                }
                GeneratorFile::RandomSubadditive { m, seed } => {
                    GeneratorSpec::RandomSubadditive { m, seed }
                }
            };
            generate(&spec).map_err(|e| InputError::new("generator", e.to_string()))
        }
        (Some(_), Some(_)) => Err(InputError::new(
            path.display().to_string(),
            "provide either values or generator, not both",
        )),
        (None, None) => Err(InputError::new(
            path.display().to_string(),
            "provide either values or generator",
        )),
    }
}

/// Loads a valuation from JSON, expanding a generator call if present.
pub fn load_valuation(path: &Path) -> Result<Valuation, InputError> {
    valuation_from_parts(read_json(path)?, path)
}

/// Writes a valuation as an explicit table; `load_valuation` restores it
/// exactly.
pub fn save_valuation(v: &Valuation, path: &Path) -> Result<(), InputError> {
    let file = ValuationFile {
        m: Some(v.m()),
        values: Some(v.values().iter().map(|x| x.to_string()).collect()),
        generator: None,
    };
    let text = serde_json::to_string_pretty(&file).expect("plain data serializes");
    fs::write(path, text + "\n")
        .map_err(|e| InputError::new(path.display().to_string(), e.to_string()))
}

/// One buyer in a market file: a path to a valuation file (resolved
/// relative to the market file) or an inline valuation.
#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum BuyerRef {
    /// Path to a valuation file.
    Path(String),
    /// Inline valuation.
    Inline(ValuationFile),
}

/// On-disk market: buyers, item prices, optional arrival order (default:
/// buyer index order).
#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    /// One valuation per buyer.
    pub buyers: Vec<BuyerRef>,
    /// One price string per item.
    pub prices: Vec<String>,
    /// Arrival order as buyer indices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<u32>>,
}

/// Loads and validates a market instance.
pub fn load_market(path: &Path) -> Result<MarketInstance, InputError> {
    let file: MarketFile = read_json(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut buyers = Vec::with_capacity(file.buyers.len());
    for (i, buyer) in file.buyers.into_iter().enumerate() {
        let v = match buyer {
            BuyerRef::Path(rel) => load_valuation(&base.join(rel)),
            BuyerRef::Inline(inline) => valuation_from_parts(inline, path),
        };
        buyers.push(
            v.map_err(|e| InputError::new(format!("buyers[{i}].{}", e.field), e.message))?,
        );
    }
    let mut prices = Vec::with_capacity(file.prices.len());
    for (i, text) in file.prices.iter().enumerate() {
        prices.push(parse_rat(text, &format!("prices[{i}]"))?);
    }
    let order = file
        .order
        .unwrap_or_else(|| (0..buyers.len() as u32).collect());
    MarketInstance::new(buyers, prices, order).map_err(|e| {
        let field = match &e {
            PostedError::NoBuyers | PostedError::MixedGroundSets { .. } => "buyers",
            PostedError::PricesLength { .. } => "prices",
            PostedError::PriceNegative { index } => {
                return InputError::new(format!("prices[{index}]"), "price is negative");
            }
            PostedError::OrderInvalid => "order",
            _ => "market",
        };
        InputError::new(field, e.to_string())
    })
}

/// On-disk product probability space: explicit per-coordinate outcome
/// probabilities, or a count of uniform bits.
#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    /// Outcome probabilities per coordinate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<Vec<f64>>>,
    /// Shorthand for this many fair binary coordinates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_bits: Option<usize>,
}

/// Loads a product space.
pub fn load_space(path: &Path) -> Result<ProductSpace, InputError> {
    let file: SpaceFile = read_json(path)?;
    match (file.probs, file.uniform_bits) {
        (Some(probs), None) => {
            ProductSpace::new(probs).map_err(|e| InputError::new("probs", e.to_string()))
        }
        (None, Some(bits)) => Ok(ProductSpace::uniform_bits(bits)),
        _ => Err(InputError::new(
            path.display().to_string(),
            "provide exactly one of probs or uniform_bits",
        )),
    }
}

/// On-disk reference sets for the isoperimetric check: each set is a list
/// of points, each point a list of outcome indices.
#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SetsFile {
    /// The reference sets.
    pub sets: Vec<Vec<Vec<usize>>>,
}

/// Loads reference sets for the isoperimetric check.
pub fn load_sets(path: &Path) -> Result<Vec<Vec<Vec<usize>>>, InputError> {
    let file: SetsFile = read_json(path)?;
    Ok(file.sets)
}

/// Writes `content` to `path`, or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<(), InputError> {
    let text = if content.ends_with('\n') {
        content.to_string()
    } else {
        format!("{content}\n")
    };
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| InputError::new(p.display().to_string(), e.to_string())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qpart_core::rat;

    #[test]
    fn rational_forms_parse_exactly() {
        assert_eq!(parse_rat("3/4", "x").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-3/6", "x").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat("7", "x").unwrap(), rat_int(7));
        assert_eq!(parse_rat("0.125", "x").unwrap(), rat(1, 8));
        assert_eq!(parse_rat("-2.50", "x").unwrap(), rat(-5, 2));
        assert_eq!(parse_rat(" 5/8 ", "x").unwrap(), rat(5, 8));
    }

    #[test]
    fn rational_rejections_name_the_field() {
        let err = parse_rat("1/0", "values[3]").unwrap_err();
        assert_eq!(err.field, "values[3]");
        assert!(err.message.contains("denominator is zero"));
        assert!(parse_rat("", "x").is_err());
        assert!(parse_rat("1.2.3", "x").is_err());
        assert!(parse_rat("abc", "x").is_err());
        assert!(parse_rat("1e3", "x").is_err());
    }

    #[test]
    fn probability_range_enforced() {
        assert_eq!(parse_probability("1/2", "p").unwrap(), rat(1, 2));
        assert!(parse_probability("3/2", "p").is_err());
        assert!(parse_probability("-1/2", "p").is_err());
    }
}
