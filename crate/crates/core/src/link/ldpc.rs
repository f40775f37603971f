//! Random regular-column-weight LDPC codes with a systematic encoder.
//!
//! Columns receive `col_weight` ones each, placed on the currently lightest
//! rows so row weights stay within one of each other. A row is skipped when it
//! already shares a column with one of the rows picked for the current column
//! (that would close a length-4 cycle), unless no other row is left. The
//! encoder comes from Gaussian elimination of `H` over GF(2): pivot columns
//! carry parity, the remaining columns carry the message.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::{Error, Result};

const MAX_ATTEMPTS: usize = 10;

/// Dense GF(2) row packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    pub(crate) fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub(crate) fn from_bits(bits: &[u8]) -> Self {
        let mut row = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                row.set(i);
            }
        }
        row
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Parity of `self AND other`.
    #[inline]
    pub(crate) fn dot(&self, other: &BitRow) -> u8 {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        (ones & 1) as u8
    }
}

/// A binary LDPC code with its parity-check matrix and systematic encoder.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    n: usize,
    checks: Vec<Vec<usize>>,
    var_checks: Vec<Vec<usize>>,
    rank: usize,
    /// Codeword positions holding message bits, ascending.
    info_positions: Vec<usize>,
    /// Codeword positions holding parity bits (pivot columns).
    parity_positions: Vec<usize>,
    /// Parity bit `i` is the GF(2) dot product of row `i` with the message.
    parity_rows: Vec<BitRow>,
}

impl LdpcCode {
    /// Code from an explicit parity-check matrix given as the variable
    /// indices of each check.
    pub fn from_checks(n: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 || checks.is_empty() {
            return Err(Error::InvalidParameter("empty parity-check matrix".into()));
        }
        let mut var_checks = vec![Vec::new(); n];
        for (c, vars) in checks.iter().enumerate() {
            for &v in vars {
                if v >= n {
                    return Err(Error::InvalidParameter(format!(
                        "check {c} references variable {v} >= {n}"
                    )));
                }
                var_checks[v].push(c);
            }
        }
        let mut rows: Vec<BitRow> = checks
            .iter()
            .map(|vars| {
                let mut r = BitRow::zeros(n);
                // a variable listed twice cancels over GF(2)
                for &v in vars {
                    r.words[v / 64] ^= 1 << (v % 64);
                }
                r
            })
            .collect();

        // reduced row echelon form
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..n {
            if next == rows.len() {
                break;
            }
            let Some(found) = (next..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(next, found);
            let pivot_row = rows[next].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next && row.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            pivots.push(col);
            next += 1;
        }
        let rank = pivots.len();
        let mut is_pivot = vec![false; n];
        pivots.iter().for_each(|&c| is_pivot[c] = true);
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let parity_rows = rows[..rank]
            .iter()
            .map(|row| {
                let mut packed = BitRow::zeros(info_positions.len());
                for (j, &c) in info_positions.iter().enumerate() {
                    if row.get(c) {
                        packed.set(j);
                    }
                }
                packed
            })
            .collect();
        Ok(Self {
            n,
            checks,
            var_checks,
            rank,
            info_positions,
            parity_positions: pivots,
            parity_rows,
        })
    }

    /// Codeword length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of message bits, `n - rank(H)`.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    pub fn var_checks(&self) -> &[Vec<usize>] {
        &self.var_checks
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Column order that makes the code systematic: parity columns first,
    /// then message columns.
    pub fn column_permutation(&self) -> Vec<usize> {
        self.parity_positions
            .iter()
            .chain(&self.info_positions)
            .copied()
            .collect()
    }

    /// Systematic encoding of `message` (length [`LdpcCode::k`], bits 0/1).
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                got: message.len(),
            });
        }
        let packed = BitRow::from_bits(message);
        let mut codeword = vec![0u8; self.n];
        for (&pos, &bit) in self.info_positions.iter().zip(message) {
            codeword[pos] = bit & 1;
        }
        for (&pos, row) in self.parity_positions.iter().zip(&self.parity_rows) {
            codeword[pos] = row.dot(&packed);
        }
        Ok(codeword)
    }

    /// Dense `k x n` generator matrix, row `j` encoding the `j`-th unit message.
    pub fn generator(&self) -> Vec<Vec<u8>> {
        (0..self.k())
            .map(|j| {
                let mut unit = vec![0u8; self.k()];
                unit[j] = 1;
                self.encode(&unit).expect("unit message has length k")
            })
            .collect()
    }

    /// Number of unsatisfied checks for hard decisions `bits`.
    pub fn syndrome_weight(&self, bits: &[u8]) -> usize {
        self.checks
            .iter()
            .filter(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) == 1)
            .count()
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        bits.len() == self.n && self.syndrome_weight(bits) == 0
    }

    /// Extracts the message from a codeword.
    pub fn message_of(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }
}

/// Random LDPC code of length `n` and design `rate` with column weight
/// `col_weight`.
///
/// The rate actually achieved, `(n - rank H)/n`, is required to lie within
/// `1/n` of `rate`; otherwise a fresh matrix is drawn, up to 10 times.
pub fn build_ldpc(n: usize, rate: f64, col_weight: usize, seed: u64) -> Result<LdpcCode> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "code rate {rate} outside (0, 1)"
        )));
    }
    let m = (n as f64 * (1.0 - rate)).round() as usize;
    if col_weight < 2 || m < col_weight || m >= n {
        return Err(Error::InvalidParameter(format!(
            "cannot build n={n}, rate={rate} with column weight {col_weight} ({m} checks)"
        )));
    }
    let mut last_reason = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = crate::rng::stream(seed, attempt as u64);
        let checks = random_parity_checks(n, m, col_weight, &mut rng);
        let code = LdpcCode::from_checks(n, checks)?;
        if (code.rate() - rate).abs() <= 1.0 / n as f64 {
            return Ok(code);
        }
        last_reason = format!(
            "rank {} of {m} checks gives rate {}",
            code.rank(),
            code.rate()
        );
    }
    Err(Error::LdpcConstruction {
        attempts: MAX_ATTEMPTS,
        reason: last_reason,
    })
}

fn random_parity_checks<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    col_weight: usize,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let mut checks: Vec<Vec<usize>> = vec![Vec::new(); m];
    // neighbours[r][s]: rows r and s already share a column
    let mut neighbours = vec![vec![false; m]; m];
    let mut columns: Vec<usize> = (0..n).collect();
    columns.shuffle(rng);

    for &col in &columns {
        let mut picked: Vec<usize> = Vec::with_capacity(col_weight);
        for _ in 0..col_weight {
            let free = |r: usize, strict: bool| {
                !picked.contains(&r) && (!strict || picked.iter().all(|&p| !neighbours[p][r]))
            };
            let choose = |strict: bool, rng: &mut R| -> Option<usize> {
                let lightest = (0..m)
                    .filter(|&r| free(r, strict))
                    .map(|r| checks[r].len())
                    .min()?;
                let pool: Vec<usize> = (0..m)
                    .filter(|&r| free(r, strict) && checks[r].len() == lightest)
                    .collect();
                pool.choose(rng).copied()
            };
            let row = choose(true, rng)
                .or_else(|| choose(false, rng))
                .expect("col_weight <= m leaves a free row");
            picked.push(row);
        }
        for (i, &a) in picked.iter().enumerate() {
            checks[a].push(col);
            for &b in &picked[i + 1..] {
                neighbours[a][b] = true;
                neighbours[b][a] = true;
            }
        }
    }
    checks.iter_mut().for_each(|c| c.sort_unstable());
    checks
}

/// Number of length-4 cycles (pairs of checks sharing two or more variables).
pub fn four_cycles(code: &LdpcCode) -> usize {
    let checks = code.checks();
    let mut count = 0;
    for a in 0..checks.len() {
        for b in (a + 1)..checks.len() {
            let shared = checks[a]
                .iter()
                .filter(|v| checks[b].binary_search(v).is_ok())
                .count();
            if shared >= 2 {
                count += shared * (shared - 1) / 2;
            }
        }
    }
    count
}
