use serde::{Deserialize, Serialize};

/// Sign vectors of one power-sum system: `alpha` weights the `nu` endpoint
/// points, `gamma` the `nu - 2` branch points, `beta` the `n - 2 nu + 3`
/// tangency points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignConfig {
    pub nu: usize,
    pub n: usize,
    pub alpha: Vec<i8>,
    pub gamma: Vec<i8>,
    pub beta: Vec<i8>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SignError {
    #[error("need nu >= 3, got {0}")]
    TooFewPoints(usize),
    #[error("degree {n} too small for nu = {nu} (need n >= 2 nu - 3)")]
    DegreeTooSmall { nu: usize, n: usize },
    #[error("{block} has length {got}, expected {expected}")]
    BlockLength { block: &'static str, got: usize, expected: usize },
    #[error("signs must be +1 or -1")]
    NotASign,
    #[error("weighted sign sum is {0}, must be 0")]
    Unbalanced(i64),
}

impl SignConfig {
    pub fn new(nu: usize, n: usize, alpha: Vec<i8>, gamma: Vec<i8>, beta: Vec<i8>) -> Result<Self, SignError> {
        if nu < 3 {
            return Err(SignError::TooFewPoints(nu));
        }
        if n + 3 < 2 * nu {
            return Err(SignError::DegreeTooSmall { nu, n });
        }
        let m = n + 3 - 2 * nu;
        for (block, v, expected) in [("alpha", &alpha, nu), ("gamma", &gamma, nu - 2), ("beta", &beta, m)] {
            if v.len() != expected {
                return Err(SignError::BlockLength {
                    block,
                    got: v.len(),
                    expected,
                });
            }
            if v.iter().any(|&s| s != 1 && s != -1) {
                return Err(SignError::NotASign);
            }
        }
        let sum = |v: &[i8]| v.iter().map(|&s| s as i64).sum::<i64>();
        let total = sum(&alpha) + 3 * sum(&gamma) + 2 * sum(&beta);
        if total != 0 {
            return Err(SignError::Unbalanced(total));
        }
        Ok(Self { nu, n, alpha, gamma, beta })
    }

    pub fn tangency_count(&self) -> usize {
        self.beta.len()
    }

    /// Number of `+1` entries per block.
    pub fn plus_counts(&self) -> (usize, usize, usize) {
        let plus = |v: &[i8]| v.iter().filter(|&&s| s == 1).count();
        (plus(&self.alpha), plus(&self.gamma), plus(&self.beta))
    }

    /// Equal up to reordering inside each block.
    pub fn same_up_to_block_permutation(&self, other: &Self) -> bool {
        self.nu == other.nu && self.n == other.n && self.plus_counts() == other.plus_counts()
    }

    /// Compact form such as `α=(+,+,-,-) γ=(+,-) β=()`.
    pub fn label(&self) -> String {
        let f = |v: &[i8]| {
            v.iter()
                .map(|&s| if s > 0 { "+" } else { "-" })
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("α=({}) γ=({}) β=({})", f(&self.alpha), f(&self.gamma), f(&self.beta))
    }
}

/// Every admissible sign system for `nu` points and degree `n`, one
/// representative per class of block-wise permutations (plus signs first).
///
/// With `p_a, p_g, p_b` the plus counts, the balance condition reduces to
/// `p_a + 3 p_g + 2 p_b = n`.
pub fn enumerate_sign_configs(nu: usize, n: usize) -> Result<Vec<SignConfig>, SignError> {
    if nu < 3 {
        return Err(SignError::TooFewPoints(nu));
    }
    if n + 3 < 2 * nu {
        return Err(SignError::DegreeTooSmall { nu, n });
    }
    let m = n + 3 - 2 * nu;
    let block = |plus: usize, len: usize| -> Vec<i8> { (0..len).map(|i| if i < plus { 1 } else { -1 }).collect() };
    let mut out = Vec::new();
    for pg in (0..=nu - 2).rev() {
        for pa in (0..=nu).rev() {
            let used = pa + 3 * pg;
            if used > n || !(n - used).is_multiple_of(2) {
                continue;
            }
            let pb = (n - used) / 2;
            if pb > m {
                continue;
            }
            out.push(SignConfig::new(nu, n, block(pa, nu), block(pg, nu - 2), block(pb, m))?);
        }
    }
    Ok(out)
}
