//! GF(2^8) arithmetic with modulus x^8 + x^4 + x^3 + x + 1 (0x11B) and
//! row-reduction rank of coefficient matrices.

use rand::Rng;

use crate::error::{ModelError, Result};

const MODULUS: u16 = 0x11B;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

const fn xtime(a: u8) -> u8 {
    let wide = (a as u16) << 1;
    if wide & 0x100 != 0 {
        (wide ^ MODULUS) as u8
    } else {
        wide as u8
    }
}

const fn build_tables() -> Tables {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u8 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x;
        log[x as usize] = i as u8;
        // step by the generator 0x03 (0x02 is not primitive for 0x11B)
        x = xtime(x) ^ x;
        i += 1;
    }
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    Tables { exp, log }
}

static TABLES: Tables = build_tables();

#[inline]
pub fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        0
    } else {
        TABLES.exp[TABLES.log[a as usize] as usize + TABLES.log[b as usize] as usize]
    }
}

/// Multiplicative inverse; `inv(0)` is undefined and returns 0.
#[inline]
pub fn inv(a: u8) -> u8 {
    if a == 0 {
        0
    } else {
        TABLES.exp[255 - TABLES.log[a as usize] as usize]
    }
}

/// Dense row-major matrix over GF(256).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GfMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl GfMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(ModelError::InvalidParams("matrix must be nonempty".into()));
        }
        Ok(GfMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, 1);
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(ModelError::InvalidParams(
                "rows must be nonempty and of equal length".into(),
            ));
        }
        Ok(GfMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        rng.fill(&mut m.data[..]);
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn rank(&self) -> usize {
        gf256_rank(self)
    }
}

/// Rank by Gaussian elimination over GF(256).
pub fn gf256_rank(matrix: &GfMatrix) -> usize {
    let mut basis = EchelonBasis::new(matrix.cols);
    for r in 0..matrix.rows {
        basis.insert(matrix.row(r));
        if basis.rank() == matrix.cols {
            break;
        }
    }
    basis.rank()
}

/// Incrementally maintained row-echelon basis; each stored row is
/// normalized to a leading 1 at its pivot column.
#[derive(Debug, Clone)]
pub struct EchelonBasis {
    cols: usize,
    rows: Vec<Vec<u8>>,
    pivots: Vec<usize>,
    scratch: Vec<u8>,
}

impl EchelonBasis {
    pub fn new(cols: usize) -> Self {
        EchelonBasis {
            cols,
            rows: Vec::with_capacity(cols),
            pivots: Vec::with_capacity(cols),
            scratch: vec![0; cols],
        }
    }

    pub fn clear(&mut self, cols: usize) {
        self.cols = cols;
        self.rows.clear();
        self.pivots.clear();
        self.scratch.resize(cols, 0);
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v`; returns whether it was linearly independent of the basis.
    pub fn insert(&mut self, v: &[u8]) -> bool {
        debug_assert_eq!(v.len(), self.cols);
        self.scratch.copy_from_slice(v);
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = self.scratch[p];
            if c != 0 {
                for (s, x) in self.scratch.iter_mut().zip(row) {
                    *s ^= mul(c, *x);
                }
            }
        }
        let Some(pivot) = self.scratch.iter().position(|x| *x != 0) else {
            return false;
        };
        let scale = inv(self.scratch[pivot]);
        let row: Vec<u8> = self.scratch.iter().map(|x| mul(*x, scale)).collect();
        self.rows.push(row);
        self.pivots.push(pivot);
        true
    }
}
