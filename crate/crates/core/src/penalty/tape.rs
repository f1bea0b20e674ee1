//! A small reverse-mode differentiation tape over dense matrices.
//!
//! Only the handful of operations the constraint functions need are
//! supported. Scalars are stored as 1x1 matrices.

use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Hadamard(Var, Var),
    Add(Var, Var),
    Scale(Var, f64),
    /// `a + s I`
    AddIdentity(Var),
    /// `a + c` for a constant matrix `c`
    AddConst(Var),
    /// `a ∘ m` for a constant mask `m`
    Mask(Var, DMatrix<f64>),
    Tanh(Var),
    /// d x d -> d x 1
    RowSums(Var),
    /// d x 1 -> d x d with `out[r][c] = v[c]`
    TileRows(Var),
    /// d x 1 -> d x d with `out[r][c] = v[r]`
    TileCols(Var),
    Sum(Var),
    Trace(Var),
    ColumnSum(Var, usize),
}

#[derive(Debug, Default)]
pub struct Tape {
    values: Vec<DMatrix<f64>>,
    ops: Vec<Op>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: DMatrix<f64>, op: Op) -> Var {
        self.values.push(value);
        self.ops.push(op);
        Var(self.values.len() - 1)
    }

    pub fn value(&self, v: Var) -> &DMatrix<f64> {
        &self.values[v.0]
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.values[v.0][(0, 0)]
    }

    pub fn leaf(&mut self, value: DMatrix<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a) * self.value(b);
        self.push(value, Op::MatMul(a, b))
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).component_mul(self.value(b));
        self.push(value, Op::Hadamard(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a) + self.value(b);
        self.push(value, Op::Add(a, b))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let value = self.value(a) * s;
        self.push(value, Op::Scale(a, s))
    }

    pub fn add_identity(&mut self, a: Var, s: f64) -> Var {
        let mut value = self.value(a).clone();
        for k in 0..value.nrows().min(value.ncols()) {
            value[(k, k)] += s;
        }
        self.push(value, Op::AddIdentity(a))
    }

    pub fn add_const(&mut self, a: Var, c: &DMatrix<f64>) -> Var {
        let value = self.value(a) + c;
        self.push(value, Op::AddConst(a))
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).add_scalar(c);
        self.push(value, Op::AddConst(a))
    }

    pub fn mask(&mut self, a: Var, m: DMatrix<f64>) -> Var {
        let value = self.value(a).component_mul(&m);
        self.push(value, Op::Mask(a, m))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::tanh);
        self.push(value, Op::Tanh(a))
    }

    pub fn row_sums(&mut self, a: Var) -> Var {
        let m = self.value(a);
        let value = DMatrix::from_fn(m.nrows(), 1, |r, _| m.row(r).sum());
        self.push(value, Op::RowSums(a))
    }

    pub fn tile_rows(&mut self, v: Var) -> Var {
        let x = self.value(v);
        let n = x.nrows();
        let value = DMatrix::from_fn(n, n, |_, c| x[(c, 0)]);
        self.push(value, Op::TileRows(v))
    }

    pub fn tile_cols(&mut self, v: Var) -> Var {
        let x = self.value(v);
        let n = x.nrows();
        let value = DMatrix::from_fn(n, n, |r, _| x[(r, 0)]);
        self.push(value, Op::TileCols(v))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = DMatrix::from_element(1, 1, self.value(a).sum());
        self.push(value, Op::Sum(a))
    }

    pub fn trace(&mut self, a: Var) -> Var {
        let value = DMatrix::from_element(1, 1, self.value(a).trace());
        self.push(value, Op::Trace(a))
    }

    pub fn column_sum(&mut self, a: Var, col: usize) -> Var {
        let value = DMatrix::from_element(1, 1, self.value(a).column(col).sum());
        self.push(value, Op::ColumnSum(a, col))
    }

    /// `a^k` by binary exponentiation; `a` must be square and `k >= 1`.
    pub fn powi(&mut self, a: Var, k: usize) -> Var {
        assert!(k >= 1, "power must be positive");
        let mut base = a;
        let mut acc: Option<Var> = None;
        let mut k = k;
        loop {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base,
                    Some(x) => self.matmul(x, base),
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = self.matmul(base, base);
        }
        acc.expect("k >= 1")
    }

    /// Gradient of the scalar `output` with respect to every node.
    pub fn gradient(&self, output: Var) -> Vec<DMatrix<f64>> {
        let mut adj: Vec<DMatrix<f64>> = self.values.iter().map(|v| DMatrix::zeros(v.nrows(), v.ncols())).collect();
        adj[output.0] = DMatrix::from_element(1, 1, 1.0);
        for idx in (0..=output.0).rev() {
            let g = std::mem::replace(&mut adj[idx], DMatrix::zeros(0, 0));
            if g.iter().all(|&x| x == 0.0) {
                adj[idx] = g;
                continue;
            }
            match &self.ops[idx] {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let ga = &g * self.values[b.0].transpose();
                    let gb = self.values[a.0].transpose() * &g;
                    adj[a.0] += ga;
                    adj[b.0] += gb;
                }
                Op::Hadamard(a, b) => {
                    let ga = g.component_mul(&self.values[b.0]);
                    let gb = g.component_mul(&self.values[a.0]);
                    adj[a.0] += ga;
                    adj[b.0] += gb;
                }
                Op::Add(a, b) => {
                    adj[a.0] += &g;
                    adj[b.0] += &g;
                }
                Op::Scale(a, s) => adj[a.0] += &g * *s,
                Op::AddIdentity(a) | Op::AddConst(a) => adj[a.0] += &g,
                Op::Mask(a, m) => adj[a.0] += g.component_mul(m),
                Op::Tanh(a) => {
                    let y = &self.values[idx];
                    adj[a.0] += g.zip_map(y, |gi, yi| gi * (1.0 - yi * yi));
                }
                Op::RowSums(a) => {
                    let target = &mut adj[a.0];
                    let ncols = target.ncols();
                    for r in 0..target.nrows() {
                        for c in 0..ncols {
                            target[(r, c)] += g[(r, 0)];
                        }
                    }
                }
                Op::TileRows(v) => {
                    for c in 0..g.ncols() {
                        adj[v.0][(c, 0)] += g.column(c).sum();
                    }
                }
                Op::TileCols(v) => {
                    for r in 0..g.nrows() {
                        adj[v.0][(r, 0)] += g.row(r).sum();
                    }
                }
                Op::Sum(a) => adj[a.0].add_scalar_mut(g[(0, 0)]),
                Op::Trace(a) => {
                    let target = &mut adj[a.0];
                    for k in 0..target.nrows().min(target.ncols()) {
                        target[(k, k)] += g[(0, 0)];
                    }
                }
                Op::ColumnSum(a, col) => {
                    let target = &mut adj[a.0];
                    for r in 0..target.nrows() {
                        target[(r, *col)] += g[(0, 0)];
                    }
                }
            }
            adj[idx] = g;
        }
        adj
    }
}
