//! Dense linear algebra over the field of a tower: determinants, rank,
//! reduced echelon form and null spaces. Pivoting always takes the first
//! nonzero entry so results are deterministic.

use super::{Elem, FieldTower};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Elem::ZERO; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<Elem>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Elem::ONE } else { Elem::ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, t: &FieldTower, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Elem::ZERO, |acc, k| {
                t.add(acc, t.mul(self.get(i, k), other.get(k, j)))
            })
        })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

/// Determinant by Gaussian elimination.
pub fn det(t: &FieldTower, m: &Matrix) -> Elem {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    let n = m.rows;
    let mut a = m.data.clone();
    det_in_place(t, &mut a, n)
}

/// Determinant of the `n`x`n` row-major buffer, destroying it.
pub(crate) fn det_in_place(t: &FieldTower, a: &mut [Elem], n: usize) -> Elem {
    let mut acc = Elem::ONE;
    let mut negate = false;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
            return Elem::ZERO;
        };
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            negate = !negate;
        }
        let pv = a[col * n + col];
        acc = t.mul(acc, pv);
        let pinv = t.inv(pv).expect("pivot is nonzero");
        for r in col + 1..n {
            let x = a[r * n + col];
            if x.is_zero() {
                continue;
            }
            let factor = t.mul(x, pinv);
            for j in col + 1..n {
                let v = t.mul(factor, a[col * n + j]);
                a[r * n + j] = t.sub(a[r * n + j], v);
            }
        }
    }
    if negate {
        t.neg(acc)
    } else {
        acc
    }
}

/// Reduced row echelon form with zero rows dropped, plus pivot columns.
pub fn rref(t: &FieldTower, m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(piv) = (r..a.rows).find(|&i| !a.get(i, col).is_zero()) else {
            continue;
        };
        a.swap_rows(piv, r);
        let inv = t.inv(a.get(r, col)).expect("pivot is nonzero");
        for j in col..a.cols {
            let v = t.mul(a.get(r, j), inv);
            a.set(r, j, v);
        }
        for i in 0..a.rows {
            if i == r {
                continue;
            }
            let factor = a.get(i, col);
            if factor.is_zero() {
                continue;
            }
            for j in col..a.cols {
                let v = t.sub(a.get(i, j), t.mul(factor, a.get(r, j)));
                a.set(i, j, v);
            }
        }
        pivots.push(col);
        r += 1;
    }
    a.data.truncate(r * a.cols);
    a.rows = r;
    (a, pivots)
}

pub fn rank(t: &FieldTower, m: &Matrix) -> usize {
    rref(t, m).1.len()
}

/// Basis of the right null space {x : M x = 0}.
pub fn nullspace(t: &FieldTower, m: &Matrix) -> Vec<Vec<Elem>> {
    let (r, pivots) = rref(t, m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Elem::ZERO; m.cols];
            v[f] = Elem::ONE;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = t.neg(r.get(row, f));
            }
            v
        })
        .collect()
}

pub fn inverse(t: &FieldTower, m: &Matrix) -> Option<Matrix> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let aug = Matrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            m.get(i, j)
        } else if j - n == i {
            Elem::ONE
        } else {
            Elem::ZERO
        }
    });
    let (r, pivots) = rref(t, &aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(Matrix::from_fn(n, n, |i, j| r.get(i, n + j)))
}
