//! Tabulated finite functions standing in for random oracles.
//!
//! An oracle is a function from `{0, .., domain_size - 1}` to n-bit strings,
//! stored as a full table so that reprogramming one point, enumerating whole
//! function spaces, and feeding superposition queries are all exact
//! operations. A k-wise independent family (degree-(k-1) polynomials over
//! GF(2^m), outputs truncated to n bits) provides the structured draws used
//! by the two-stage simulator analysis.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2m::BinaryField;
use crate::tol;
use crate::trial_rng;

/// A fully tabulated function from a finite domain to n-bit strings.
///
/// Serialized as `{"domain_size": .., "range_bits": .., "table": [..]}`,
/// which is the pinned wire format for regression fixtures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFiniteFunction")]
pub struct FiniteFunction {
    domain_size: usize,
    range_bits: u32,
    table: Vec<u64>,
}

#[derive(Deserialize)]
struct RawFiniteFunction {
    domain_size: usize,
    range_bits: u32,
    table: Vec<u64>,
}

impl TryFrom<RawFiniteFunction> for FiniteFunction {
    type Error = Error;

    fn try_from(raw: RawFiniteFunction) -> Result<Self> {
        FiniteFunction::from_table(raw.domain_size, raw.range_bits, raw.table)
    }
}

impl FiniteFunction {
    /// Wraps an explicit table, validating sizes and entry ranges.
    pub fn from_table(domain_size: usize, range_bits: u32, table: Vec<u64>) -> Result<Self> {
        if domain_size == 0 {
            return Err(Error::InvalidArgument("empty oracle domain".into()));
        }
        if range_bits == 0 || range_bits > 32 {
            return Err(Error::InvalidArgument(format!(
                "range_bits must be in 1..=32, got {range_bits}"
            )));
        }
        if table.len() != domain_size {
            return Err(Error::InvalidArgument(format!(
                "table length {} does not match domain size {domain_size}",
                table.len()
            )));
        }
        let range = 1u64 << range_bits;
        for &v in &table {
            if v >= range {
                return Err(Error::OutOfRange {
                    what: "oracle table entry",
                    value: v,
                    bound: range,
                });
            }
        }
        Ok(FiniteFunction {
            domain_size,
            range_bits,
            table,
        })
    }

    /// Uniformly random function, deterministic in the seed.
    pub fn sample_uniform(domain_size: usize, range_bits: u32, seed: u64) -> Result<Self> {
        Self::sample_uniform_capped(domain_size, range_bits, seed, tol::DEFAULT_TABLE_CAP)
    }

    /// As [`FiniteFunction::sample_uniform`] with an explicit cap on the
    /// number of table entries.
    pub fn sample_uniform_capped(
        domain_size: usize,
        range_bits: u32,
        seed: u64,
        cap: u64,
    ) -> Result<Self> {
        check_table_capacity(domain_size, range_bits, cap)?;
        let mut rng = trial_rng(seed, 0);
        Self::sample_with(domain_size, range_bits, &mut rng)
    }

    /// Uniformly random function drawn from a caller-provided generator.
    pub fn sample_with(domain_size: usize, range_bits: u32, rng: &mut impl Rng) -> Result<Self> {
        let mask = (1u64 << range_bits) - 1;
        let table = (0..domain_size).map(|_| rng.gen::<u64>() & mask).collect();
        Self::from_table(domain_size, range_bits, table)
    }

    /// The constant-zero function.
    pub fn zero(domain_size: usize, range_bits: u32) -> Result<Self> {
        Self::from_table(domain_size, range_bits, vec![0; domain_size])
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn range_bits(&self) -> u32 {
        self.range_bits
    }

    /// Number of range values, 2^range_bits.
    pub fn range_size(&self) -> u64 {
        1u64 << self.range_bits
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn evaluate(&self, x: usize) -> Result<u64> {
        self.table.get(x).copied().ok_or(Error::OutOfRange {
            what: "oracle input",
            value: x as u64,
            bound: self.domain_size as u64,
        })
    }

    /// The function that agrees with `self` everywhere except at `x`, where
    /// it returns `theta`.
    pub fn reprogram(&self, x: usize, theta: u64) -> Result<Self> {
        if x >= self.domain_size {
            return Err(Error::OutOfRange {
                what: "reprogram point",
                value: x as u64,
                bound: self.domain_size as u64,
            });
        }
        if theta >= self.range_size() {
            return Err(Error::OutOfRange {
                what: "reprogram value",
                value: theta,
                bound: self.range_size(),
            });
        }
        let mut table = self.table.clone();
        table[x] = theta;
        Ok(FiniteFunction {
            domain_size: self.domain_size,
            range_bits: self.range_bits,
            table,
        })
    }
}

fn check_table_capacity(domain_size: usize, range_bits: u32, cap: u64) -> Result<()> {
    if range_bits == 0 || range_bits > 63 {
        return Err(Error::InvalidArgument(format!(
            "range bits {range_bits} outside 1..=63"
        )));
    }
    if domain_size as u64 > cap {
        return Err(Error::Capacity {
            what: "oracle table",
            requested: domain_size as u64,
            cap,
        });
    }
    Ok(())
}

/// Enumerates every function of the given shape, in lexicographic table
/// order. Guarded by [`tol::DEFAULT_ENUMERATION_CAP`] on the count
/// `2^(range_bits * domain_size)`.
pub fn all_functions(domain_size: usize, range_bits: u32) -> Result<Vec<FiniteFunction>> {
    let total_bits = (range_bits as u64).saturating_mul(domain_size as u64);
    let count = if total_bits >= 63 {
        u64::MAX
    } else {
        1u64 << total_bits
    };
    if count > tol::DEFAULT_ENUMERATION_CAP {
        return Err(Error::Capacity {
            what: "function space enumeration",
            requested: count,
            cap: tol::DEFAULT_ENUMERATION_CAP,
        });
    }
    let range = 1u64 << range_bits;
    let mut out = Vec::with_capacity(count as usize);
    let mut table = vec![0u64; domain_size];
    loop {
        out.push(FiniteFunction::from_table(
            domain_size,
            range_bits,
            table.clone(),
        )?);
        // Odometer increment over the table.
        let mut pos = domain_size;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            table[pos] += 1;
            if table[pos] < range {
                break;
            }
            table[pos] = 0;
        }
    }
}

/// One member of the k-wise independent family: a polynomial of degree
/// k - 1 over GF(2^m) with m = max(ceil(log2 domain_size), range_bits).
/// Inputs embed as field elements bit-for-bit; outputs keep the low
/// `range_bits` bits. Truncating a uniform field element is uniform because
/// m >= range_bits, and distinct domain points stay distinct because
/// m >= log2(domain_size), so the polynomial family is k-wise independent
/// on the embedded domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KWiseFamilyMember {
    field: BinaryField,
    coefficients: Vec<u64>,
    domain_size: usize,
    range_bits: u32,
}

/// Field exponent used by the family for a given oracle shape.
pub fn family_field_bits(domain_size: usize, range_bits: u32) -> u32 {
    let domain_bits = usize::BITS - (domain_size.saturating_sub(1)).leading_zeros();
    domain_bits.max(range_bits).max(1)
}

impl KWiseFamilyMember {
    /// Uniform draw of a family member with independence parameter `k`.
    pub fn sample(
        k: u32,
        domain_size: usize,
        range_bits: u32,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "independence parameter k must be positive".into(),
            ));
        }
        let field = BinaryField::new(family_field_bits(domain_size, range_bits))?;
        let mask = field.order() - 1;
        let coefficients = (0..k).map(|_| rng.gen::<u64>() & mask).collect();
        Self::from_coefficients(field, coefficients, domain_size, range_bits)
    }

    pub fn from_coefficients(
        field: BinaryField,
        coefficients: Vec<u64>,
        domain_size: usize,
        range_bits: u32,
    ) -> Result<Self> {
        if field.bits() < family_field_bits(domain_size, range_bits) {
            return Err(Error::InvalidArgument(format!(
                "field GF(2^{}) too small for domain {domain_size} / {range_bits} range bits",
                field.bits()
            )));
        }
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("no coefficients".into()));
        }
        if coefficients.iter().any(|&c| !field.contains(c)) {
            return Err(Error::InvalidArgument(
                "coefficient outside the field".into(),
            ));
        }
        Ok(KWiseFamilyMember {
            field,
            coefficients,
            domain_size,
            range_bits,
        })
    }

    pub fn k(&self) -> u32 {
        self.coefficients.len() as u32
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn range_bits(&self) -> u32 {
        self.range_bits
    }

    /// Evaluates the member at a domain point.
    pub fn evaluate(&self, x: usize) -> Result<u64> {
        if x >= self.domain_size {
            return Err(Error::OutOfRange {
                what: "hash input",
                value: x as u64,
                bound: self.domain_size as u64,
            });
        }
        let value = self.field.eval_poly(&self.coefficients, x as u64);
        Ok(value & ((1u64 << self.range_bits) - 1))
    }

    /// Tabulates the member as a [`FiniteFunction`].
    pub fn materialize(&self) -> Result<FiniteFunction> {
        self.materialize_capped(tol::DEFAULT_TABLE_CAP)
    }

    pub fn materialize_capped(&self, cap: u64) -> Result<FiniteFunction> {
        check_table_capacity(self.domain_size, self.range_bits, cap)?;
        let table = (0..self.domain_size)
            .map(|x| self.evaluate(x))
            .collect::<Result<Vec<_>>>()?;
        FiniteFunction::from_table(self.domain_size, self.range_bits, table)
    }
}

/// Enumerates the whole degree-(k-1) family for a given oracle shape, in
/// lexicographic coefficient order. Guarded by
/// [`tol::DEFAULT_ENUMERATION_CAP`] on the family size `2^(m k)`.
pub fn enumerate_family(
    k: u32,
    domain_size: usize,
    range_bits: u32,
) -> Result<Vec<KWiseFamilyMember>> {
    let field = BinaryField::new(family_field_bits(domain_size, range_bits))?;
    let bits = (field.bits() as u64).saturating_mul(k as u64);
    let count = if bits >= 63 { u64::MAX } else { 1u64 << bits };
    if count > tol::DEFAULT_ENUMERATION_CAP {
        return Err(Error::Capacity {
            what: "hash family enumeration",
            requested: count,
            cap: tol::DEFAULT_ENUMERATION_CAP,
        });
    }
    let order = field.order();
    let mut out = Vec::with_capacity(count as usize);
    let mut coeffs = vec![0u64; k as usize];
    loop {
        out.push(KWiseFamilyMember::from_coefficients(
            field,
            coeffs.clone(),
            domain_size,
            range_bits,
        )?);
        let mut pos = coeffs.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            coeffs[pos] += 1;
            if coeffs[pos] < order {
                break;
            }
            coeffs[pos] = 0;
        }
    }
}
