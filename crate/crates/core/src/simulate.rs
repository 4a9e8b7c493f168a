//! Fixed-step time-domain simulation on a uniform grid, plus the signal
//! norms used by the learning diagnostics.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::realization::StateSpace;

/// Uniform grid of `nodes` points covering `[0, t_end]` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    pub t_end: f64,
    pub nodes: usize,
}

impl Grid {
    pub fn new(t_end: f64, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {nodes}")));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {t_end}")));
        }
        Ok(Grid { t_end, nodes })
    }

    pub fn step(&self) -> f64 {
        self.t_end / (self.nodes - 1) as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        if i + 1 == self.nodes {
            self.t_end
        } else {
            i as f64 * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes).map(|i| self.t(i))
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid { t_end: 10.0, nodes: 2001 }
    }
}

/// Multichannel signal sampled on a grid; values are stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    grid: Grid,
    dims: usize,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(grid: Grid, dims: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nodes * dims {
            return Err(Error::Dimension(format!(
                "{} values for {} nodes x {dims} channels",
                values.len(),
                grid.nodes
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sampled signal"));
        }
        Ok(SampledSignal { grid, dims, values })
    }

    pub fn zeros(grid: Grid, dims: usize) -> Self {
        SampledSignal { grid, dims, values: vec![0.0; grid.nodes * dims] }
    }

    pub fn from_fn(grid: Grid, dims: usize, f: impl Fn(f64, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.nodes * dims);
        for i in 0..grid.nodes {
            let t = grid.t(i);
            for ch in 0..dims {
                values.push(f(t, ch));
            }
        }
        SampledSignal { grid, dims, values }
    }

    /// Constant signal holding `v` at every node.
    pub fn constant(grid: Grid, v: &[f64]) -> Self {
        SampledSignal::from_fn(grid, v.len(), |_, ch| v[ch])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.grid.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn get(&self, i: usize, ch: usize) -> f64 {
        self.values[i * self.dims + ch]
    }

    pub fn channel(&self, ch: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(i, ch)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn check_same(&self, other: &SampledSignal) -> Result<()> {
        if self.grid != other.grid || self.dims != other.dims {
            return Err(Error::Dimension(format!(
                "signal shapes differ: {}x{} vs {}x{}",
                self.len(),
                self.dims,
                other.len(),
                other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &SampledSignal) -> Result<SampledSignal> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(SampledSignal { grid: self.grid, dims: self.dims, values })
    }

    pub fn sub(&self, other: &SampledSignal) -> Result<SampledSignal> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(SampledSignal { grid: self.grid, dims: self.dims, values })
    }

    pub fn scale(&self, k: f64) -> SampledSignal {
        SampledSignal { grid: self.grid, dims: self.dims, values: self.values.iter().map(|v| v * k).collect() }
    }

    /// Applies a constant matrix at every node: `out_i = m · self_i`.
    pub fn map_matrix(&self, m: &DMatrix<f64>) -> Result<SampledSignal> {
        if m.ncols() != self.dims {
            return Err(Error::Dimension(format!("{}x{} matrix on {}-channel signal", m.nrows(), m.ncols(), self.dims)));
        }
        let out_dims = m.nrows();
        let mut values = vec![0.0; self.len() * out_dims];
        for i in 0..self.len() {
            let row = self.row(i);
            for r in 0..out_dims {
                values[i * out_dims + r] = (0..self.dims).map(|c| m[(r, c)] * row[c]).sum();
            }
        }
        Ok(SampledSignal { grid: self.grid, dims: out_dims, values })
    }

    /// Channel concatenation.
    pub fn stack(&self, other: &SampledSignal) -> Result<SampledSignal> {
        if self.grid != other.grid {
            return Err(Error::Dimension("stacking signals on different grids".into()));
        }
        let dims = self.dims + other.dims;
        let mut values = Vec::with_capacity(self.len() * dims);
        for i in 0..self.len() {
            values.extend_from_slice(self.row(i));
            values.extend_from_slice(other.row(i));
        }
        Ok(SampledSignal { grid: self.grid, dims, values })
    }

    /// Writes `t` followed by one column per channel, 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W, names: &[String]) -> Result<()> {
        let mut header = String::from("t");
        for ch in 0..self.dims {
            header.push(',');
            match names.get(ch) {
                Some(n) => header.push_str(n),
                None => header.push_str(&format!("ch{ch}")),
            }
        }
        writeln!(w, "{header}")?;
        for i in 0..self.len() {
            let mut line = fmt_num(self.grid.t(i));
            for v in self.row(i) {
                line.push(',');
                line.push_str(&fmt_num(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// 12 significant digits in scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

/// Output of [`lsim_full`]: the response and its exact time derivative.
#[derive(Debug, Clone)]
pub struct Response {
    pub y: SampledSignal,
    /// `ẏ = C(Ax + Bu + w) + D·u̇`; the feedthrough term is included only
    /// when `u̇` was supplied.
    pub y_dot: SampledSignal,
}

/// Simulates `ẋ = Ax + Bu + w`, `y = Cx + Du` with classic RK4, linearly
/// interpolating `u` and `w` between nodes.
pub fn lsim(ss: &StateSpace, u: &SampledSignal, w: Option<&SampledSignal>, x0: &[f64]) -> Result<SampledSignal> {
    Ok(lsim_full(ss, u, None, w, x0)?.y)
}

pub fn lsim_full(
    ss: &StateSpace,
    u: &SampledSignal,
    u_dot: Option<&SampledSignal>,
    w: Option<&SampledSignal>,
    x0: &[f64],
) -> Result<Response> {
    let (n, p, q) = (ss.n(), ss.inputs(), ss.outputs());
    if u.dims() != p {
        return Err(Error::Dimension(format!("system has {p} inputs, signal has {}", u.dims())));
    }
    if x0.len() != n {
        return Err(Error::Dimension(format!("system has {n} states, x0 has {}", x0.len())));
    }
    if let Some(w) = w {
        if w.dims() != n || w.grid() != u.grid() {
            return Err(Error::Dimension(format!("state disturbance must have {n} channels on the input grid")));
        }
    }
    if let Some(ud) = u_dot {
        if ud.dims() != p || ud.grid() != u.grid() {
            return Err(Error::Dimension("input derivative shape differs from input".into()));
        }
    }
    if !u.is_finite() || !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("simulation input"));
    }

    let grid = u.grid();
    let h = grid.step();
    let a = ss.a();
    let b = ss.b();
    let c = ss.c();
    let d = ss.d();
    let mut x = DVector::from_column_slice(x0);
    let mut y: Vec<f64> = Vec::with_capacity(grid.nodes * q);
    let mut ydot = Vec::with_capacity(grid.nodes * q);

    let forcing = |i: usize| -> DVector<f64> {
        let mut f = b * DVector::from_column_slice(u.row(i));
        if let Some(w) = w {
            f += DVector::from_column_slice(w.row(i));
        }
        f
    };

    let mut f_cur = forcing(0);
    for i in 0..grid.nodes {
        let ui = DVector::from_column_slice(u.row(i));
        let xdot = a * &x + &f_cur;
        let yi = c * &x + d * &ui;
        let mut ydi = c * &xdot;
        if let Some(ud) = u_dot {
            ydi += d * DVector::from_column_slice(ud.row(i));
        }
        y.extend(yi.iter());
        ydot.extend(ydi.iter());
        if i + 1 == grid.nodes {
            break;
        }
        let f_next = forcing(i + 1);
        let f_mid = (&f_cur + &f_next) * 0.5;
        let k1 = xdot;
        let k2 = a * (&x + &k1 * (0.5 * h)) + &f_mid;
        let k3 = a * (&x + &k2 * (0.5 * h)) + &f_mid;
        let k4 = a * (&x + &k3 * h) + &f_next;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        f_cur = f_next;
    }
    if y.iter().chain(&ydot).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("simulation output"));
    }
    Ok(Response {
        y: SampledSignal { grid, dims: q, values: y },
        y_dot: SampledSignal { grid, dims: q, values: ydot },
    })
}

/// `sup_t ‖f(t)‖_∞ e^{−λt}` over the grid nodes.
pub fn lambda_norm(f: &SampledSignal, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let g = f.grid();
    Ok((0..f.len())
        .map(|i| {
            let m = f.row(i).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            m * (-lambda * g.t(i)).exp()
        })
        .fold(0.0, f64::max))
}

/// Central differences inside, second-order one-sided stencils at the ends.
pub fn finite_diff(f: &SampledSignal) -> Result<SampledSignal> {
    let n = f.len();
    if n < 3 {
        return Err(Error::InvalidGrid(format!("finite differences need at least 3 nodes, got {n}")));
    }
    let h = f.grid().step();
    let dims = f.dims();
    let mut out = vec![0.0; n * dims];
    for ch in 0..dims {
        let v = |i: usize| f.get(i, ch);
        out[ch] = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
        for i in 1..n - 1 {
            out[i * dims + ch] = (v(i + 1) - v(i - 1)) / (2.0 * h);
        }
        out[(n - 1) * dims + ch] = (3.0 * v(n - 1) - 4.0 * v(n - 2) + v(n - 3)) / (2.0 * h);
    }
    SampledSignal::new(f.grid(), dims, out)
}

/// `max_t ‖f(t)‖_∞`.
pub fn sup_norm(f: &SampledSignal) -> f64 {
    f.values().iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
