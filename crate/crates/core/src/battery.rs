//! Seeded problem generators shared by tests and benchmarks: a fixed battery
//! of LPs with known status, random bounded LPs, and random small cascades.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::contracts::{CascadeTriple, LinearContract};
use crate::lp::LpProblem;
use crate::mat::{row_matrix, vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expected {
    /// Known optimum, or `None` when only the status is known up front.
    Optimal(Option<f64>),
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct BatteryCase {
    pub name: String,
    pub problem: LpProblem,
    pub expected: Expected,
}

/// Small deterministic generator.
pub struct Gen(ChaCha8Rng);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Multiple of 1/4 in `[-k, k]`.
    pub fn quarter(&mut self, k: i64) -> f64 {
        let steps = 8 * k + 1;
        ((self.0.next_u64() % steps as u64) as i64 - 4 * k) as f64 / 4.0
    }

    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn vec(&mut self, n: usize, lo: f64, hi: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.range(lo, hi))
    }

    pub fn mat(&mut self, r: usize, c: usize, lo: f64, hi: f64) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| self.range(lo, hi))
    }
}

fn lp(c: &[f64], a: &[&[f64]], b: &[f64]) -> LpProblem {
    let a = if a.is_empty() { DMatrix::zeros(0, c.len()) } else { row_matrix(a) };
    LpProblem::new(vector(c), a, vector(b)).expect("battery case is well-formed")
}

fn stack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows() + b.nrows(), a.ncols(), |i, j| {
        if i < a.nrows() { a[(i, j)] } else { b[(i - a.nrows(), j)] }
    })
}

fn box_rows(n: usize, bound: f64) -> (DMatrix<f64>, DVector<f64>) {
    let a = DMatrix::from_fn(2 * n, n, |i, j| {
        if i / 2 == j { if i % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 }
    });
    (a, DVector::from_element(2 * n, bound))
}

/// Random LP over a box `|x_i| ≤ 5` with `m` extra rows, feasible by
/// construction and hence bounded with an optimum.
pub fn random_bounded_lp(g: &mut Gen, n: usize, m: usize) -> LpProblem {
    let (bx, bb) = box_rows(n, 5.0);
    let a = g.mat(m, n, -2.0, 2.0);
    let x0 = g.vec(n, -4.0, 4.0);
    let b = &a * &x0 + g.vec(m, 0.0, 1.0);
    let rows = stack(&bx, &a);
    let rhs = DVector::from_iterator(2 * n + m, bb.iter().chain(b.iter()).copied());
    LpProblem::new(g.vec(n, -3.0, 3.0), rows, rhs).expect("well-formed")
}

fn random_infeasible_lp(g: &mut Gen, n: usize, m: usize) -> LpProblem {
    let base = random_bounded_lp(g, n, m);
    let row = g.vec(n, -2.0, 2.0);
    let c = g.range(-3.0, 3.0);
    let mut a = base.constraint_matrix().clone();
    let mut b: Vec<f64> = base.rhs().iter().copied().collect();
    let k = a.nrows();
    a = a.insert_rows(k, 2, 0.0);
    a.set_row(k, &row.transpose());
    a.set_row(k + 1, &(-row.transpose()));
    b.push(c);
    b.push(-c - 1.0);
    LpProblem::new(base.objective().clone(), a, DVector::from_vec(b)).expect("well-formed")
}

fn random_unbounded_lp(g: &mut Gen, n: usize, m: usize) -> LpProblem {
    let ray = g.vec(n, -1.0, 1.0).normalize();
    let mut a = g.mat(m, n, -2.0, 2.0);
    for i in 0..m {
        let dot = a.row(i).transpose().dot(&ray);
        if dot > 0.0 {
            let neg = -a.row(i).clone_owned();
            a.set_row(i, &neg);
        }
    }
    let x0 = g.vec(n, -4.0, 4.0);
    let b = &a * &x0 + g.vec(m, 0.0, 1.0);
    let mut c = g.vec(n, -3.0, 3.0);
    if c.dot(&ray) < 0.0 {
        c = -c;
    }
    c += &ray;
    LpProblem::new(c, a, b).expect("well-formed")
}

/// Fifty LPs: twenty hand-written classics with known answers, then ten each
/// of seeded bounded, infeasible and unbounded instances (at most 4 variables
/// and 12 rows, so vertex enumeration can cross-check them).
pub fn lp_battery() -> Vec<BatteryCase> {
    use Expected::*;
    let mut out = Vec::new();
    let mut add = |name: &str, problem: LpProblem, expected: Expected| {
        out.push(BatteryCase { name: name.to_string(), problem, expected });
    };
    add("single binding constraint", lp(&[1.0], &[&[1.0]], &[1.0]), Optimal(Some(1.0)));
    add("contradictory bounds", lp(&[1.0], &[&[1.0], &[-1.0]], &[1.0, -2.0]), Infeasible);
    add("half-line", lp(&[1.0], &[&[-1.0]], &[0.0]), Unbounded);
    add(
        "Beale cycling example",
        lp(
            &[0.75, -150.0, 0.02, -6.0],
            &[
                &[0.25, -60.0, -0.04, 9.0],
                &[0.5, -90.0, -0.02, 3.0],
                &[0.0, 0.0, 1.0, 0.0],
                &[-1.0, 0.0, 0.0, 0.0],
                &[0.0, -1.0, 0.0, 0.0],
                &[0.0, 0.0, -1.0, 0.0],
                &[0.0, 0.0, 0.0, -1.0],
            ],
            &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        ),
        Optimal(Some(0.05)),
    );
    add(
        "Klee-Minty 3",
        lp(
            &[100.0, 10.0, 1.0],
            &[
                &[1.0, 0.0, 0.0],
                &[20.0, 1.0, 0.0],
                &[200.0, 20.0, 1.0],
                &[-1.0, 0.0, 0.0],
                &[0.0, -1.0, 0.0],
                &[0.0, 0.0, -1.0],
            ],
            &[1.0, 100.0, 10000.0, 0.0, 0.0, 0.0],
        ),
        Optimal(Some(10000.0)),
    );
    add(
        "Klee-Minty 4",
        lp(
            &[1000.0, 100.0, 10.0, 1.0],
            &[
                &[1.0, 0.0, 0.0, 0.0],
                &[20.0, 1.0, 0.0, 0.0],
                &[200.0, 20.0, 1.0, 0.0],
                &[2000.0, 200.0, 20.0, 1.0],
                &[-1.0, 0.0, 0.0, 0.0],
                &[0.0, -1.0, 0.0, 0.0],
                &[0.0, 0.0, -1.0, 0.0],
                &[0.0, 0.0, 0.0, -1.0],
            ],
            &[1.0, 100.0, 10000.0, 1e6, 0.0, 0.0, 0.0, 0.0],
        ),
        Optimal(Some(1e6)),
    );
    add(
        "degenerate vertex",
        lp(
            &[1.0, 1.0],
            &[&[1.0, 1.0], &[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0], &[1.0, 2.0]],
            &[1.0, 1.0, 1.0, 0.0, 0.0, 2.0],
        ),
        Optimal(Some(1.0)),
    );
    add("free difference", lp(&[1.0, -1.0], &[&[1.0, -1.0], &[-1.0, 0.0]], &[3.0, 5.0]), Optimal(Some(3.0)));
    add(
        "equality as pair",
        lp(&[2.0, 3.0], &[&[1.0, 1.0], &[-1.0, -1.0], &[-1.0, 0.0], &[0.0, -1.0]], &[4.0, -4.0, 0.0, 0.0]),
        Optimal(Some(12.0)),
    );
    add("phase one needed", lp(&[-1.0, -1.0], &[&[-1.0, 0.0], &[0.0, -1.0]], &[-1.0, -2.0]), Optimal(Some(-3.0)));
    add(
        "infeasible triangle",
        lp(&[0.0, 0.0], &[&[1.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]], &[1.0, -1.0, -1.0]),
        Infeasible,
    );
    add("unbounded wedge", lp(&[0.0, 1.0], &[&[-1.0, 1.0]], &[0.0]), Unbounded);
    add("zero objective", lp(&[0.0], &[&[1.0]], &[1.0]), Optimal(Some(0.0)));
    add("duplicate rows", lp(&[1.0], &[&[1.0], &[1.0], &[2.0]], &[2.0, 2.0, 4.0]), Optimal(Some(2.0)));
    add(
        "textbook production",
        lp(
            &[3.0, 5.0],
            &[&[1.0, 0.0], &[0.0, 2.0], &[3.0, 2.0], &[-1.0, 0.0], &[0.0, -1.0]],
            &[4.0, 12.0, 18.0, 0.0, 0.0],
        ),
        Optimal(Some(36.0)),
    );
    add(
        "two-row intersection",
        lp(
            &[1.0, 1.0],
            &[&[1.0, 2.0], &[3.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]],
            &[4.0, 6.0, 0.0, 0.0],
        ),
        Optimal(Some(2.8)),
    );
    add(
        "infeasible negative orthant",
        lp(&[1.0, 1.0], &[&[1.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]], &[-1.0, 0.0, 0.0]),
        Infeasible,
    );
    add(
        "unbounded free coordinate",
        lp(&[1.0, 1.0, 1.0], &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]], &[1.0, 1.0]),
        Unbounded,
    );
    add("no constraints, zero objective", lp(&[0.0, 0.0], &[], &[]), Optimal(Some(0.0)));
    add("no constraints", lp(&[1.0, 0.0], &[], &[]), Unbounded);

    let mut g = Gen::new(0x5eed_ba77);
    for i in 0..10 {
        let (n, m) = (g.int(2, 4), g.int(2, 4));
        add(&format!("seeded bounded {i}"), random_bounded_lp(&mut g, n, m), Optimal(None));
    }
    for i in 0..10 {
        let (n, m) = (g.int(2, 4), g.int(1, 2));
        add(&format!("seeded infeasible {i}"), random_infeasible_lp(&mut g, n, m), Infeasible);
    }
    for i in 0..10 {
        let (n, m) = (g.int(2, 4), g.int(2, 8));
        add(&format!("seeded unbounded {i}"), random_unbounded_lp(&mut g, n, m), Unbounded);
    }
    out
}

/// Dual of `max cᵀx s.t. Ax ≤ b` written as a maximisation:
/// `max −bᵀy s.t. Aᵀy ≤ c, −Aᵀy ≤ −c, −y ≤ 0`. Its optimum is minus the
/// primal optimum.
pub fn dual_of(p: &LpProblem) -> LpProblem {
    let a = p.constraint_matrix();
    let (m, n) = a.shape();
    let at = a.transpose();
    let rows = stack(&stack(&at, &(-&at)), &(-DMatrix::identity(m, m)));
    let rhs = DVector::from_iterator(
        2 * n + m,
        p.objective().iter().copied().chain(p.objective().iter().map(|v| -v)).chain((0..m).map(|_| 0.0)),
    );
    LpProblem::new(-p.rhs(), rows, rhs).expect("well-formed")
}

/// Signal dimensions `(n_d, n_z, n_y)` of a random cascade.
pub type Dims = (usize, usize, usize);

/// Premise rows for a one-dimensional signal pair `(u₀, u₁)` plus coupling to
/// other columns: `±u₁ + … ≤ r`, `±u₀ + … ≤ r`. These bound `(u₀, u₁)` once
/// the coupled signals are bounded.
fn bounding_rows(g: &mut Gen, extra: usize) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    // Columns: [u, coupled...]; next and now blocks.
    let cols = 1 + extra;
    let mut next = DMatrix::zeros(4, cols);
    let mut now = DMatrix::zeros(4, cols);
    for r in 0..4 {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        if r < 2 {
            next[(r, 0)] = sign;
            now[(r, 0)] = g.quarter(1) / 2.0;
        } else {
            now[(r, 0)] = sign;
        }
        for j in 1..cols {
            next[(r, j)] = g.quarter(1);
            now[(r, j)] = g.quarter(1);
        }
    }
    (next, now, g.vec(4, 0.5, 2.0))
}

fn free_rows(g: &mut Gen, rows: usize, cols: usize, rhs_lo: f64) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    (
        DMatrix::from_fn(rows, cols, |_, _| g.quarter(2)),
        DMatrix::from_fn(rows, cols, |_, _| g.quarter(2)),
        g.vec(rows, rhs_lo, 2.0),
    )
}

/// Moves the first column block (the contract's output when `output_first`)
/// behind the remaining columns, so guarantee matrices read `[input, output]`.
fn reorder(m: &DMatrix<f64>, out_cols: usize) -> DMatrix<f64> {
    let n = m.ncols();
    DMatrix::from_fn(m.nrows(), n, |i, j| {
        let in_cols = n - out_cols;
        if j < in_cols { m[(i, out_cols + j)] } else { m[(i, j - in_cols)] }
    })
}

/// A random cascade with at most four rows per matrix. With all dimensions 1
/// and `bounded`, every premise polyhedron is a polytope: each premise
/// family contains rows boxing its own signal given the signals before it.
/// Otherwise premise rows are random (possibly unbounded). Premises always
/// contain the origin, so they are never empty.
pub fn random_triple(g: &mut Gen, dims: Dims, bounded: bool) -> CascadeTriple {
    let (nd, nz, ny) = dims;
    let bounded = bounded && dims == (1, 1, 1);
    let conclusion = |g: &mut Gen, cols: usize| {
        let rows = g.int(1, 4);
        free_rows(g, rows, cols, -1.0)
    };

    let (c1a, c0a, ca) = if bounded {
        bounding_rows(g, 0)
    } else {
        let rows = g.int(1, 4);
        free_rows(g, rows, nd, 0.25)
    };
    let (ga1, ga0, ga) = conclusion(g, nd);
    let (gg1, gg0, gg) = if bounded {
        let (n, w, r) = bounding_rows(g, nd);
        (reorder(&n, nz), reorder(&w, nz), r)
    } else {
        let rows = g.int(1, 4);
        free_rows(g, rows, nd + nz, 0.25)
    };
    let (gb1, gb0, gb) = conclusion(g, nz);
    let (gh1, gh0, gh) = if bounded {
        let (n, w, r) = bounding_rows(g, nz);
        (reorder(&n, ny), reorder(&w, ny), r)
    } else {
        let rows = g.int(1, 4);
        free_rows(g, rows, nz + ny, 0.25)
    };
    let (gj1, gj0, gj) = conclusion(g, nd + ny);

    let upstream = LinearContract::new("c1", nd, nz, ga1, ga0, ga, gg1, gg0, gg).expect("shape");
    let downstream = LinearContract::new("c2", nz, ny, gb1, gb0, gb, gh1, gh0, gh).expect("shape");
    let composite = LinearContract::new("c", nd, ny, c1a, c0a, ca, gj1, gj0, gj).expect("shape");
    CascadeTriple::new(upstream, downstream, composite).expect("dimensions agree")
}

/// All dimension triples with entries in {1, 2} and sum at most 4.
pub fn small_dims() -> Vec<Dims> {
    let mut out = Vec::new();
    for nd in 1..=2 {
        for nz in 1..=2 {
            for ny in 1..=2 {
                if nd + nz + ny <= 4 {
                    out.push((nd, nz, ny));
                }
            }
        }
    }
    out
}

/// `bounded` all-ones cascades followed by `mixed` cascades of varied
/// dimensions, reproducibly from `seed`.
pub fn oracle_batch(seed: u64, bounded: usize, mixed: usize) -> Vec<CascadeTriple> {
    let mut g = Gen::new(seed);
    let dims = small_dims();
    let mut out: Vec<CascadeTriple> = (0..bounded).map(|_| random_triple(&mut g, (1, 1, 1), true)).collect();
    for i in 0..mixed {
        out.push(random_triple(&mut g, dims[i % dims.len()], false));
    }
    out
}
