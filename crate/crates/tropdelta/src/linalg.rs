//! Exact sparse integer linear algebra.
//!
//! - [`SparseIntMatrix`]: triplet-form integer matrix, column-major sorted,
//!   with a bit-exact plain-text serialization.
//! - [`SparseIntMatrix::rank_mod_p`]: sparse elimination over a prime field
//!   with fill-reducing (Markowitz) pivot selection.
//! - [`SparseIntMatrix::rank_rational`]: rank over the rationals, certified
//!   by fraction-free elimination for small matrices and by agreement of
//!   independently drawn word-size primes otherwise.
//! - [`SparseIntMatrix::smith_normal_form`]: invariant factors over the
//!   integers with arbitrary-precision entries.
//! - [`SparseIntMatrix::snf_by_minors`]: independent gcd-of-minors oracle for
//!   small matrices, used to cross-check the elimination-based normal form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("entry ({row}, {col}) out of bounds for {rows} x {cols} matrix")]
    IndexOutOfBounds {
        row: u32,
        col: u32,
        rows: usize,
        cols: usize,
    },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: u32, col: u32 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("matrix with min dimension {dim} exceeds the cap {cap}; use rank_rational instead")]
    CapExceeded { dim: usize, cap: usize },
    #[error("malformed triplet file: {0}")]
    BadTripletFile(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Invariant factors `d_1 | d_2 | ... | d_r` of an integer matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SnfResult {
    factors: Vec<BigInt>,
}

impl SnfResult {
    pub fn new(mut factors: Vec<BigInt>) -> Self {
        for f in &mut factors {
            *f = f.abs();
        }
        let out = SnfResult { factors };
        out.assert_chain();
        out
    }

    fn assert_chain(&self) {
        for w in self.factors.windows(2) {
            assert!(
                (&w[1] % &w[0]).is_zero(),
                "invariant factors must form a divisibility chain: {:?}",
                self.factors
            );
        }
        assert!(self.factors.iter().all(|f| f.is_positive()));
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[BigInt] {
        &self.factors
    }

    /// Factors greater than one, i.e. the torsion part.
    pub fn nontrivial_factors(&self) -> Vec<BigInt> {
        self.factors
            .iter()
            .filter(|f| !f.is_one())
            .cloned()
            .collect()
    }

    /// Compact description such as `(1^9, 2)`.
    pub fn describe(&self) -> String {
        let mut runs: Vec<(BigInt, usize)> = Vec::new();
        for f in &self.factors {
            match runs.last_mut() {
                Some((v, c)) if v == f => *c += 1,
                _ => runs.push((f.clone(), 1)),
            }
        }
        let mut s = String::from("(");
        for (i, (v, c)) in runs.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            if *c == 1 {
                let _ = write!(s, "{v}");
            } else {
                let _ = write!(s, "{v}^{c}");
            }
        }
        s.push(')');
        s
    }
}

/// A sparse integer matrix in triplet form, sorted column-major, with no
/// stored zeros and no duplicate positions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SparseIntMatrix {
    rows: usize,
    cols: usize,
    /// `(row, col, value)`, sorted by `(col, row)`.
    entries: Vec<(u32, u32, i64)>,
}

impl SparseIntMatrix {
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut entries: Vec<(u32, u32, i64)>,
    ) -> Result<Self, LinalgError> {
        entries.retain(|&(_, _, v)| v != 0);
        entries.sort_unstable_by_key(|&(r, c, _)| (c, r));
        for &(r, c, _) in &entries {
            if r as usize >= rows || c as usize >= cols {
                return Err(LinalgError::IndexOutOfBounds {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
        }
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(LinalgError::DuplicateEntry {
                    row: w[0].0,
                    col: w[0].1,
                });
            }
        }
        Ok(SparseIntMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseIntMatrix {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseIntMatrix {
            rows: n,
            cols: n,
            entries: (0..n as u32).map(|i| (i, i, 1)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u32, u32, i64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn transpose(&self) -> Self {
        let entries = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        SparseIntMatrix::from_triplets(self.cols, self.rows, entries).expect("transpose is valid")
    }

    /// Entries of one column, as `(row, value)` pairs sorted by row.
    pub fn column(&self, col: u32) -> Vec<(u32, i64)> {
        let lo = self.entries.partition_point(|&(_, c, _)| c < col);
        let hi = self.entries.partition_point(|&(_, c, _)| c <= col);
        self.entries[lo..hi].iter().map(|&(r, _, v)| (r, v)).collect()
    }

    /// Append extra columns on the right.
    pub fn augment_columns(&self, extra: &[Vec<(u32, i64)>]) -> Self {
        let mut entries = self.entries.clone();
        for (j, col) in extra.iter().enumerate() {
            let c = (self.cols + j) as u32;
            for &(r, v) in col {
                entries.push((r, c, v));
            }
        }
        SparseIntMatrix::from_triplets(self.rows, self.cols + extra.len(), entries)
            .expect("augmented matrix is valid")
    }

    /// Matrix product, exact; panics on i64 overflow (entries here are tiny).
    pub fn multiply(&self, rhs: &SparseIntMatrix) -> SparseIntMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let left_cols: Vec<Vec<(u32, i64)>> = {
            let mut cols = vec![Vec::new(); self.cols];
            for &(r, c, v) in &self.entries {
                cols[c as usize].push((r, v));
            }
            cols
        };
        let mut entries = Vec::new();
        let mut acc: BTreeMap<u32, i64> = BTreeMap::new();
        let mut current_col = 0u32;
        let mut flush =
            |acc: &mut BTreeMap<u32, i64>, col: u32, entries: &mut Vec<(u32, u32, i64)>| {
                for (&r, &v) in acc.iter() {
                    if v != 0 {
                        entries.push((r, col, v));
                    }
                }
                acc.clear();
            };
        for &(r, c, v) in &rhs.entries {
            if c != current_col {
                flush(&mut acc, current_col, &mut entries);
                current_col = c;
            }
            for &(lr, lv) in &left_cols[r as usize] {
                let term = lv.checked_mul(v).expect("product overflow");
                let slot = acc.entry(lr).or_insert(0);
                *slot = slot.checked_add(term).expect("sum overflow");
            }
        }
        flush(&mut acc, current_col, &mut entries);
        SparseIntMatrix::from_triplets(self.rows, rhs.cols, entries).expect("product is valid")
    }

    /// Plain-text triplet serialization: header `ROWS COLS M`, one line per
    /// nonzero `i j v` with 1-based indices in column-major order, terminated
    /// by `0 0 0`.
    pub fn write_triplet_text<W: Write>(&self, mut w: W) -> Result<(), LinalgError> {
        writeln!(w, "{} {} {}", self.rows, self.cols, self.entries.len())?;
        for &(r, c, v) in &self.entries {
            writeln!(w, "{} {} {}", r + 1, c + 1, v)?;
        }
        writeln!(w, "0 0 0")?;
        Ok(())
    }

    pub fn read_triplet_text<R: Read>(r: R) -> Result<Self, LinalgError> {
        let mut lines = BufReader::new(r).lines();
        let header = lines
            .next()
            .ok_or_else(|| LinalgError::BadTripletFile("missing header".into()))??;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| LinalgError::BadTripletFile(format!("bad header: {e}")))?;
        let [rows, cols, m] = dims[..] else {
            return Err(LinalgError::BadTripletFile("header needs 3 fields".into()));
        };
        let mut entries = Vec::with_capacity(m);
        let mut terminated = false;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<i64> = line
                .split_whitespace()
                .map(|t| t.parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|e| LinalgError::BadTripletFile(format!("bad entry: {e}")))?;
            let [i, j, v] = parts[..] else {
                return Err(LinalgError::BadTripletFile("entry needs 3 fields".into()));
            };
            if (i, j, v) == (0, 0, 0) {
                terminated = true;
                break;
            }
            if i < 1 || j < 1 {
                return Err(LinalgError::BadTripletFile("indices are 1-based".into()));
            }
            entries.push((i as u32 - 1, j as u32 - 1, v));
        }
        if !terminated {
            return Err(LinalgError::BadTripletFile("missing 0 0 0 terminator".into()));
        }
        if entries.len() != m {
            return Err(LinalgError::BadTripletFile(format!(
                "header promised {m} entries, found {}",
                entries.len()
            )));
        }
        SparseIntMatrix::from_triplets(rows, cols, entries)
    }

    /// Rank over the field with `p` elements, by sparse elimination with
    /// Markowitz pivot selection.
    pub fn rank_mod_p(&self, p: u64) -> Result<usize, LinalgError> {
        if !is_prime(p) {
            return Err(LinalgError::NotPrime(p));
        }
        assert!(p < (1 << 31), "modulus must fit 31 bits");
        Ok(ModularElimination::new(self, p).run())
    }

    /// Rank over the rationals.
    ///
    /// Small matrices (min dimension <= 64) are certified exactly by
    /// fraction-free Bareiss elimination.  Larger ones take the maximum of
    /// modular ranks over independently drawn random word-size primes,
    /// drawing until `agreeing` of them agree; the modular rank never
    /// exceeds the rational rank and equals it for all but finitely many
    /// primes.
    pub fn rank_rational(&self, seed: u64) -> usize {
        self.rank_rational_with(seed, 2)
    }

    pub fn rank_rational_with(&self, seed: u64, agreeing: usize) -> usize {
        if self.rows.min(self.cols) <= 64 {
            return self.bareiss_rank();
        }
        let agreeing = agreeing.max(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen: Vec<u64> = Vec::new();
        let mut ranks: BTreeMap<usize, usize> = BTreeMap::new();
        loop {
            let p = draw_prime(&mut rng, &seen);
            seen.push(p);
            let r = self.rank_mod_p(p).expect("drawn modulus is prime");
            let count = ranks.entry(r).or_insert(0);
            *count += 1;
            if *count >= agreeing {
                return r;
            }
            assert!(
                seen.len() < 32,
                "modular ranks refuse to stabilize: {ranks:?}"
            );
        }
    }

    /// Exact rank by dense fraction-free (Bareiss) elimination over the
    /// integers.  Deterministic; intended for small matrices.
    pub fn bareiss_rank(&self) -> usize {
        // eliminate along the smaller dimension
        let work = if self.rows <= self.cols {
            self.clone()
        } else {
            self.transpose()
        };
        let (nr, nc) = (work.rows, work.cols);
        let mut m: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); nc]; nr];
        for &(r, c, v) in &work.entries {
            m[r as usize][c as usize] = BigInt::from(v);
        }
        let mut rank = 0usize;
        let mut prev = BigInt::one();
        for col in 0..nc {
            let Some(pivot_row) = (rank..nr).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(rank, pivot_row);
            let pivot = m[rank][col].clone();
            for r in rank + 1..nr {
                for c in col + 1..nc {
                    let num = &pivot * &m[r][c] - &m[r][col] * &m[rank][c];
                    m[r][c] = num / &prev;
                }
                m[r][col] = BigInt::zero();
            }
            prev = pivot;
            rank += 1;
            if rank == nr {
                break;
            }
        }
        rank
    }

    /// Smith normal form over the integers.
    ///
    /// Elimination picks pivots of minimal magnitude (then minimal fill) and
    /// keeps all arithmetic in arbitrary precision, so coefficient growth is
    /// handled exactly.  Refuses matrices whose min dimension exceeds `cap`.
    pub fn smith_normal_form(&self, cap: usize) -> Result<SnfResult, LinalgError> {
        let dim = self.rows.min(self.cols);
        if dim > cap {
            return Err(LinalgError::CapExceeded { dim, cap });
        }
        Ok(SnfElimination::new(self).run())
    }

    /// Invariant factors via gcds of all `k x k` minors:
    /// `d_1 ... d_k = gcd of k x k minors`.  Only for matrices with min
    /// dimension at most 8; used as a test oracle.
    pub fn snf_by_minors(&self) -> Result<SnfResult, LinalgError> {
        const CAP: usize = 8;
        let dim = self.rows.min(self.cols);
        if dim > CAP {
            return Err(LinalgError::CapExceeded { dim, cap: CAP });
        }
        let mut dense = vec![vec![0i128; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            dense[r as usize][c as usize] = v as i128;
        }
        let mut factors = Vec::new();
        let mut prev_gcd: i128 = 1;
        for k in 1..=dim {
            let mut g: i128 = 0;
            for rows in combinations(self.rows, k) {
                for cols in combinations(self.cols, k) {
                    let det = minor_det(&dense, &rows, &cols);
                    g = gcd_i128(g, det);
                }
            }
            if g == 0 {
                break;
            }
            factors.push(BigInt::from(g / prev_gcd));
            prev_gcd = g;
        }
        Ok(SnfResult::new(factors))
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, buf: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if buf.len() == k {
            out.push(buf.clone());
            return;
        }
        for i in start..n {
            buf.push(i);
            rec(i + 1, n, k, buf, out);
            buf.pop();
        }
    }
    rec(0, n, k, &mut buf, &mut out);
    out
}

fn minor_det(m: &[Vec<i128>], rows: &[usize], cols: &[usize]) -> i128 {
    // fraction-free elimination on a copy; sizes are at most 8x8
    let k = rows.len();
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| m[r][c]).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for t in 0..k {
        let Some(pr) = (t..k).find(|&r| a[r][t] != 0) else {
            return 0;
        };
        if pr != t {
            a.swap(pr, t);
            sign = -sign;
        }
        for r in t + 1..k {
            for c in t + 1..k {
                a[r][c] = (a[t][t] * a[r][c] - a[r][t] * a[t][c]) / prev;
            }
            a[r][t] = 0;
        }
        prev = a[t][t];
    }
    sign * a[k - 1][k - 1]
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn draw_prime(rng: &mut ChaCha8Rng, exclude: &[u64]) -> u64 {
    loop {
        let candidate = rng.random_range((1u64 << 30)..(1u64 << 31)) | 1;
        let mut p = candidate;
        while !is_prime(p) {
            p += 2;
        }
        if p < (1 << 31) && !exclude.contains(&p) {
            return p;
        }
    }
}

/// Sparse Gaussian elimination over `F_p` with Markowitz-style pivoting:
/// pick a column of minimal active count, then the row of minimal count
/// within it.  Retired rows and columns leave the active submatrix.
struct ModularElimination {
    p: u64,
    /// Active rows, each sorted by column.
    rows: Vec<Vec<(u32, u64)>>,
    /// Rows known to touch each column; may contain stale ids, validated
    /// against `rows` on use.
    col_rows: Vec<Vec<u32>>,
    col_nnz: Vec<u32>,
    row_alive: Vec<bool>,
    col_alive: Vec<bool>,
    /// Bucket queue over column counts for pivot selection.
    buckets: Vec<Vec<u32>>,
    bucket_floor: usize,
}

const BUCKET_CAP: usize = 256;

impl ModularElimination {
    fn new(m: &SparseIntMatrix, p: u64) -> Self {
        let mut rows: Vec<Vec<(u32, u64)>> = vec![Vec::new(); m.rows];
        let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); m.cols];
        let mut col_nnz = vec![0u32; m.cols];
        for &(r, c, v) in &m.entries {
            let vm = v.rem_euclid(p as i64) as u64;
            if vm == 0 {
                continue;
            }
            rows[r as usize].push((c, vm));
            col_rows[c as usize].push(r);
            col_nnz[c as usize] += 1;
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|&(c, _)| c);
        }
        let mut buckets = vec![Vec::new(); BUCKET_CAP + 1];
        for c in 0..m.cols {
            if col_nnz[c] > 0 {
                buckets[(col_nnz[c] as usize).min(BUCKET_CAP)].push(c as u32);
            }
        }
        ModularElimination {
            p,
            rows,
            col_rows,
            col_nnz,
            row_alive: vec![true; m.rows],
            col_alive: vec![true; m.cols],
            buckets,
            bucket_floor: 1,
        }
    }

    fn requeue_col(&mut self, c: u32) {
        let n = self.col_nnz[c as usize] as usize;
        if n == 0 || !self.col_alive[c as usize] {
            return;
        }
        let b = n.min(BUCKET_CAP);
        self.buckets[b].push(c);
        if b < self.bucket_floor {
            self.bucket_floor = b;
        }
    }

    fn pop_pivot_col(&mut self) -> Option<u32> {
        loop {
            while self.bucket_floor <= BUCKET_CAP && self.buckets[self.bucket_floor].is_empty() {
                self.bucket_floor += 1;
            }
            if self.bucket_floor > BUCKET_CAP {
                return None;
            }
            let c = self.buckets[self.bucket_floor].pop().unwrap();
            if !self.col_alive[c as usize] || self.col_nnz[c as usize] == 0 {
                continue;
            }
            let actual = (self.col_nnz[c as usize] as usize).min(BUCKET_CAP);
            if actual != self.bucket_floor {
                // stale bucket entry; put it where it belongs
                self.buckets[actual].push(c);
                if actual < self.bucket_floor {
                    self.bucket_floor = actual;
                }
                continue;
            }
            return Some(c);
        }
    }

    fn row_value(&self, r: u32, c: u32) -> Option<u64> {
        let row = &self.rows[r as usize];
        row.binary_search_by_key(&c, |&(col, _)| col)
            .ok()
            .map(|i| row[i].1)
    }

    fn run(&mut self) -> usize {
        let mut rank = 0usize;
        while let Some(pc) = self.pop_pivot_col() {
            // collect live rows actually holding this column
            let mut live: Vec<u32> = Vec::with_capacity(self.col_nnz[pc as usize] as usize);
            let ids = std::mem::take(&mut self.col_rows[pc as usize]);
            for r in ids {
                if self.row_alive[r as usize] && self.row_value(r, pc).is_some() {
                    live.push(r);
                }
            }
            live.sort_unstable();
            live.dedup();
            self.col_nnz[pc as usize] = live.len() as u32;
            if live.is_empty() {
                // support may reappear through later row operations
                continue;
            }
            // Markowitz: shortest row among candidates, lowest id on ties
            let pr = *live
                .iter()
                .min_by_key(|&&r| (self.rows[r as usize].len(), r))
                .unwrap();
            let pivot_val = self.row_value(pr, pc).unwrap();
            let pivot_inv = pow_mod(pivot_val, self.p - 2, self.p);
            let pivot_row = std::mem::take(&mut self.rows[pr as usize]);
            for &r in &live {
                if r == pr {
                    continue;
                }
                let factor = mul_mod(self.row_value(r, pc).unwrap(), pivot_inv, self.p);
                self.axpy_row(r, &pivot_row, factor);
            }
            // retire pivot row and column
            self.row_alive[pr as usize] = false;
            self.col_alive[pc as usize] = false;
            for &(c, _) in &pivot_row {
                if self.col_alive[c as usize] {
                    self.col_nnz[c as usize] -= 1;
                    self.requeue_col(c);
                }
            }
            rank += 1;
        }
        rank
    }

    /// `row[r] -= factor * pivot_row` over `F_p`, maintaining column counts.
    fn axpy_row(&mut self, r: u32, pivot_row: &[(u32, u64)], factor: u64) {
        let p = self.p;
        let old = std::mem::take(&mut self.rows[r as usize]);
        let mut merged = Vec::with_capacity(old.len() + pivot_row.len());
        let (mut i, mut j) = (0usize, 0usize);
        while i < old.len() || j < pivot_row.len() {
            let next = match (old.get(i), pivot_row.get(j)) {
                (Some(&(ca, va)), Some(&(cb, vb))) => {
                    if ca == cb {
                        i += 1;
                        j += 1;
                        let sub = mul_mod(factor, vb, p);
                        let v = (va + p - sub) % p;
                        (ca, v, false)
                    } else if ca < cb {
                        i += 1;
                        (ca, va, false)
                    } else {
                        j += 1;
                        let v = (p - mul_mod(factor, vb, p)) % p;
                        (cb, v, true)
                    }
                }
                (Some(&(ca, va)), None) => {
                    i += 1;
                    (ca, va, false)
                }
                (None, Some(&(cb, vb))) => {
                    j += 1;
                    let v = (p - mul_mod(factor, vb, p)) % p;
                    (cb, v, true)
                }
                (None, None) => unreachable!(),
            };
            let (c, v, is_new_pos) = next;
            if v != 0 {
                if is_new_pos && self.col_alive[c as usize] {
                    self.col_nnz[c as usize] += 1;
                    self.col_rows[c as usize].push(r);
                    self.requeue_col(c);
                }
                merged.push((c, v));
            } else if !is_new_pos && self.col_alive[c as usize] {
                // an existing entry cancelled
                self.col_nnz[c as usize] -= 1;
                self.requeue_col(c);
            }
        }
        self.rows[r as usize] = merged;
    }
}

/// Two-sided integer elimination computing the Smith normal form.  Sparse
/// row storage with a column index; pivots of minimal magnitude, fill as the
/// tie-break.
struct SnfElimination {
    rows: Vec<BTreeMap<u32, BigInt>>,
    col_index: Vec<std::collections::BTreeSet<u32>>,
    row_alive: Vec<bool>,
    col_alive: Vec<bool>,
}

impl SnfElimination {
    fn new(m: &SparseIntMatrix) -> Self {
        let mut rows: Vec<BTreeMap<u32, BigInt>> = vec![BTreeMap::new(); m.rows];
        let mut col_index = vec![std::collections::BTreeSet::new(); m.cols];
        for &(r, c, v) in &m.entries {
            rows[r as usize].insert(c, BigInt::from(v));
            col_index[c as usize].insert(r);
        }
        SnfElimination {
            rows,
            col_index,
            row_alive: vec![true; m.rows],
            col_alive: vec![true; m.cols],
        }
    }

    fn set(&mut self, r: u32, c: u32, v: BigInt) {
        if v.is_zero() {
            if self.rows[r as usize].remove(&c).is_some() {
                self.col_index[c as usize].remove(&r);
            }
        } else {
            self.rows[r as usize].insert(c, v);
            self.col_index[c as usize].insert(r);
        }
    }

    fn get(&self, r: u32, c: u32) -> BigInt {
        self.rows[r as usize].get(&c).cloned().unwrap_or_default()
    }

    /// Minimal-magnitude active entry, fill-count tie-break, then position.
    fn find_pivot(&self) -> Option<(u32, u32)> {
        let mut best: Option<(BigInt, usize, u32, u32)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            if !self.row_alive[r] {
                continue;
            }
            for (&c, v) in row {
                if !self.col_alive[c as usize] {
                    continue;
                }
                let mag = v.abs();
                let fill = (row.len() - 1) * (self.col_index[c as usize].len() - 1);
                let key = (mag, fill, r as u32, c);
                let better = match &best {
                    None => true,
                    Some((bm, bf, br, bc)) => {
                        (&key.0, key.1, key.2, key.3) < (bm, *bf, *br, *bc)
                    }
                };
                if better {
                    if key.0.is_one() && key.1 == 0 {
                        return Some((key.2, key.3));
                    }
                    best = Some(key);
                }
            }
        }
        best.map(|(_, _, r, c)| (r, c))
    }

    fn rows_in_col(&self, c: u32, except: u32) -> Vec<u32> {
        self.col_index[c as usize]
            .iter()
            .copied()
            .filter(|&r| r != except && self.row_alive[r as usize])
            .collect()
    }

    fn cols_in_row(&self, r: u32, except: u32) -> Vec<u32> {
        self.rows[r as usize]
            .keys()
            .copied()
            .filter(|&c| c != except && self.col_alive[c as usize])
            .collect()
    }

    /// `row[dst] -= q * row[src]`.
    fn row_op(&mut self, dst: u32, src: u32, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        let src_row: Vec<(u32, BigInt)> = self.rows[src as usize]
            .iter()
            .map(|(&c, v)| (c, v.clone()))
            .collect();
        for (c, v) in src_row {
            let new = self.get(dst, c) - q * v;
            self.set(dst, c, new);
        }
    }

    /// `col[dst] -= q * col[src]`.
    fn col_op(&mut self, dst: u32, src: u32, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        let rows: Vec<u32> = self.col_index[src as usize].iter().copied().collect();
        for r in rows {
            let v = self.get(r, src);
            let new = self.get(r, dst) - q * v;
            self.set(r, dst, new);
        }
    }

    fn run(&mut self) -> SnfResult {
        let mut factors: Vec<BigInt> = Vec::new();
        while let Some((mut pr, mut pc)) = self.find_pivot() {
            // clear the pivot row and column; division steps may move the
            // pivot to a smaller remainder, so loop until clean
            'reduce: loop {
                let pivot = self.get(pr, pc);
                debug_assert!(!pivot.is_zero());
                for r in self.rows_in_col(pc, pr) {
                    let v = self.get(r, pc);
                    let (q, rem) = v.div_rem(&pivot);
                    self.row_op(r, pr, &q);
                    if !rem.is_zero() {
                        pr = r;
                        continue 'reduce;
                    }
                }
                for c in self.cols_in_row(pr, pc) {
                    let v = self.get(pr, c);
                    let (q, rem) = v.div_rem(&pivot);
                    self.col_op(c, pc, &q);
                    if !rem.is_zero() {
                        pc = c;
                        continue 'reduce;
                    }
                }
                // pivot row and column are clear; enforce that the pivot
                // divides everything left so the factors form a chain
                if !pivot.abs().is_one() {
                    let offender = self.rows.iter().enumerate().find_map(|(r, row)| {
                        if !self.row_alive[r] || r as u32 == pr {
                            return None;
                        }
                        row.iter().find_map(|(&c, v)| {
                            (self.col_alive[c as usize]
                                && c != pc
                                && !(v % &pivot).is_zero())
                            .then_some(r as u32)
                        })
                    });
                    if let Some(r) = offender {
                        // fold that row into the pivot row and keep reducing
                        let minus_one = -BigInt::one();
                        self.row_op(pr, r, &minus_one);
                        continue 'reduce;
                    }
                }
                break;
            }
            factors.push(self.get(pr, pc).abs());
            self.row_alive[pr as usize] = false;
            self.col_alive[pc as usize] = false;
        }
        factors.sort();
        SnfResult::new(factors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: usize, cols: usize, data: &[&[i64]]) -> SparseIntMatrix {
        let mut entries = Vec::new();
        for (r, row) in data.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    entries.push((r as u32, c as u32, v));
                }
            }
        }
        SparseIntMatrix::from_triplets(rows, cols, entries).unwrap()
    }

    #[test]
    fn rank_mod_p_identity_and_zero() {
        let id = SparseIntMatrix::identity(5);
        assert_eq!(id.rank_mod_p(1_000_003).unwrap(), 5);
        let z = SparseIntMatrix::zero(4, 7);
        assert_eq!(z.rank_mod_p(1_000_003).unwrap(), 0);
    }

    #[test]
    fn rank_mod_p_rejects_composite() {
        let id = SparseIntMatrix::identity(2);
        assert!(matches!(
            id.rank_mod_p(1_000_000),
            Err(LinalgError::NotPrime(_))
        ));
    }

    #[test]
    fn rational_rank_sees_through_bad_primes() {
        // diag(2, 3) has rank 1 mod 2 and mod 3 but rank 2 over the rationals
        let m = dense(2, 2, &[&[2, 0], &[0, 3]]);
        assert_eq!(m.rank_mod_p(2).unwrap(), 1);
        assert_eq!(m.rank_rational(7), 2);
        assert_eq!(m.bareiss_rank(), 2);
    }

    #[test]
    fn snf_textbook_example() {
        let m = dense(2, 2, &[&[2, 4], &[6, 8]]);
        let snf = m.smith_normal_form(5000).unwrap();
        assert_eq!(
            snf.factors(),
            &[BigInt::from(2), BigInt::from(4)],
            "gcd of entries is 2, |det| = 8"
        );
    }

    #[test]
    fn snf_identity() {
        let snf = SparseIntMatrix::identity(6).smith_normal_form(5000).unwrap();
        assert_eq!(snf.rank(), 6);
        assert!(snf.nontrivial_factors().is_empty());
    }

    #[test]
    fn minors_oracle_basics() {
        let z = SparseIntMatrix::zero(1, 1);
        let snf = z.snf_by_minors().unwrap();
        assert_eq!(snf.rank(), 0);
        let d = dense(2, 2, &[&[1, 0], &[0, 2]]);
        assert_eq!(
            d.snf_by_minors().unwrap().factors(),
            &[BigInt::from(1), BigInt::from(2)]
        );
    }

    #[test]
    fn snf_agrees_with_minors_on_seeded_random_matrices() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..1000 {
            let rows = rng.random_range(1..=5usize);
            let cols = rng.random_range(1..=6usize);
            let mut entries = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v: i64 = rng.random_range(-3..=3);
                    if v != 0 {
                        entries.push((r as u32, c as u32, v));
                    }
                }
            }
            let m = SparseIntMatrix::from_triplets(rows, cols, entries).unwrap();
            let fast = m.smith_normal_form(5000).unwrap();
            let oracle = m.snf_by_minors().unwrap();
            assert_eq!(fast, oracle, "trial {trial} disagreed on {m:?}");
        }
    }

    #[test]
    fn snf_invariant_under_permutation_and_sign_flips() {
        use rand::seq::SliceRandom;
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let rows = rng.random_range(2..=5usize);
            let cols = rng.random_range(2..=5usize);
            let mut entries = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v: i64 = rng.random_range(-4..=4);
                    if v != 0 {
                        entries.push((r as u32, c as u32, v));
                    }
                }
            }
            let m = SparseIntMatrix::from_triplets(rows, cols, entries.clone()).unwrap();
            let mut row_perm: Vec<u32> = (0..rows as u32).collect();
            let mut col_perm: Vec<u32> = (0..cols as u32).collect();
            row_perm.shuffle(&mut rng);
            col_perm.shuffle(&mut rng);
            let row_sign: Vec<i64> = (0..rows).map(|_| if rng.random() { 1 } else { -1 }).collect();
            let col_sign: Vec<i64> = (0..cols).map(|_| if rng.random() { 1 } else { -1 }).collect();
            let permuted: Vec<(u32, u32, i64)> = entries
                .iter()
                .map(|&(r, c, v)| {
                    (
                        row_perm[r as usize],
                        col_perm[c as usize],
                        v * row_sign[r as usize] * col_sign[c as usize],
                    )
                })
                .collect();
            let m2 = SparseIntMatrix::from_triplets(rows, cols, permuted).unwrap();
            assert_eq!(
                m.smith_normal_form(5000).unwrap(),
                m2.smith_normal_form(5000).unwrap()
            );
        }
    }

    #[test]
    fn triplet_text_round_trip_is_bit_exact() {
        let m = dense(3, 4, &[&[0, 2, 0, -1], &[5, 0, 0, 0], &[0, 0, -7, 3]]);
        let mut buf = Vec::new();
        m.write_triplet_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3 4 5\n"));
        assert!(text.ends_with("0 0 0\n"));
        let back = SparseIntMatrix::read_triplet_text(&buf[..]).unwrap();
        assert_eq!(back, m);
        let mut buf2 = Vec::new();
        back.write_triplet_text(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn rank_bounds_hold_for_modular_ranks() {
        let m = dense(3, 3, &[&[2, 1, 3], &[4, 2, 6], &[1, 0, 5]]);
        let exact = m.bareiss_rank();
        for p in [2u64, 3, 5, 1_000_003] {
            assert!(m.rank_mod_p(p).unwrap() <= exact);
        }
    }

    #[test]
    fn snf_cap_is_enforced() {
        let m = SparseIntMatrix::identity(10);
        assert!(matches!(
            m.smith_normal_form(5),
            Err(LinalgError::CapExceeded { .. })
        ));
    }

    #[test]
    fn miller_rabin_matches_small_primes() {
        let primes: Vec<u64> = (2..200).filter(|&n| (2..n).all(|d| n % d != 0)).collect();
        for n in 2..200 {
            assert_eq!(is_prime(n), primes.contains(&n), "n = {n}");
        }
        assert!(is_prime((1 << 31) - 1));
    }
}
