//! The Fermi-Hubbard model on a small rectangular grid and the
//! spin-conserving generator pool the adaptive ansatz draws from.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::{FermionOperator, Ladder};

/// Grids are limited to this many sites (two modes per site).
pub const MAX_SITES: usize = crate::MAX_MODES / 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Boundary {
    #[default]
    Open,
    PeriodicX,
    PeriodicXY,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// Mode index of `(site, spin)`: spins are interleaved.
#[inline]
pub const fn mode(site: usize, spin: Spin) -> usize {
    2 * site + spin as usize
}

#[inline]
pub const fn site_of(mode: usize) -> usize {
    mode / 2
}

#[inline]
pub const fn is_down(mode: usize) -> bool {
    mode % 2 == 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    width: usize,
    height: usize,
    boundary: Boundary,
}

impl GridSpec {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::with_boundary(width, height, Boundary::Open)
    }

    pub fn with_boundary(width: usize, height: usize, boundary: Boundary) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation("grid dimensions must be positive"));
        }
        let sites = width * height;
        if sites > MAX_SITES {
            return Err(Error::Resource {
                what: "grid sites",
                requested: sites,
                limit: MAX_SITES,
            });
        }
        Ok(GridSpec {
            width,
            height,
            boundary,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn n_sites(&self) -> usize {
        self.width * self.height
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites()
    }

    pub fn site(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.width, site / self.width)
    }

    /// Nearest-neighbour bonds `(i, j)` with `i < j`, sorted and distinct.
    /// A wrap-around bond that coincides with an interior one (length-2
    /// periodic direction) is counted once.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let wrap_x = matches!(self.boundary, Boundary::PeriodicX | Boundary::PeriodicXY);
        let wrap_y = matches!(self.boundary, Boundary::PeriodicXY);
        let mut set = BTreeSet::new();
        let mut push = |a: usize, b: usize| {
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        };
        for y in 0..self.height {
            for x in 0..self.width {
                let i = self.site(x, y);
                if x + 1 < self.width {
                    push(i, self.site(x + 1, y));
                } else if wrap_x {
                    push(i, self.site(0, y));
                }
                if y + 1 < self.height {
                    push(i, self.site(x, y + 1));
                } else if wrap_y {
                    push(i, self.site(x, 0));
                }
            }
        }
        set.into_iter().collect()
    }

    /// Length and periodicity when the grid is a chain (`1 x L` or `L x 1`).
    pub fn chain(&self) -> Option<(usize, bool)> {
        if self.height == 1 {
            Some((self.width, self.boundary != Boundary::Open))
        } else if self.width == 1 {
            Some((self.height, self.boundary == Boundary::PeriodicXY))
        } else {
            None
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HubbardParams {
    pub t: f64,
    pub u: f64,
    /// Chemical potential per spin-orbital; enters as `-mu * N`.
    pub mu: f64,
}

impl HubbardParams {
    pub fn new(t: f64, u: f64) -> Self {
        HubbardParams { t, u, mu: 0.0 }
    }

    /// `mu = U / 2`, the particle-hole symmetric shift at half filling.
    pub fn half_filling_shift(t: f64, u: f64) -> Self {
        HubbardParams { t, u, mu: u / 2.0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t.is_finite() && self.u.is_finite() && self.mu.is_finite()) {
            return Err(Error::validation("t, U and mu must be finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HubbardModel {
    pub grid: GridSpec,
    pub params: HubbardParams,
}

impl HubbardModel {
    pub fn new(grid: GridSpec, params: HubbardParams) -> Self {
        HubbardModel { grid, params }
    }

    pub fn n_sites(&self) -> usize {
        self.grid.n_sites()
    }

    pub fn n_modes(&self) -> usize {
        self.grid.n_modes()
    }

    pub fn hamiltonian(&self) -> Result<FermionOperator> {
        build_hamiltonian(&self.grid, &self.params)
    }

    /// One-body matrix `h_ij` (row-major, `n_sites x n_sites`) of the
    /// kinetic term: `-t` on every bond, zero elsewhere.
    pub fn hopping_matrix(&self) -> Vec<f64> {
        let n = self.n_sites();
        let mut h = alloc::vec![0.0; n * n];
        for (i, j) in self.grid.bonds() {
            h[i * n + j] -= self.params.t;
            h[j * n + i] -= self.params.t;
        }
        h
    }
}

/// `H = -t sum_<ij>,s (c+_is c_js + h.c.) + U sum_i n_iu n_id - mu sum_is n_is`.
pub fn build_hamiltonian(grid: &GridSpec, params: &HubbardParams) -> Result<FermionOperator> {
    params.validate()?;
    let n = grid.n_modes();
    let mut h = FermionOperator::zero(n);
    let hop = Complex64::new(-params.t, 0.0);
    for (i, j) in grid.bonds() {
        for spin in [Spin::Up, Spin::Down] {
            let (a, b) = (mode(i, spin), mode(j, spin));
            h.add_term(hop, &[Ladder::create(a), Ladder::annihilate(b)])?;
            h.add_term(hop, &[Ladder::create(b), Ladder::annihilate(a)])?;
        }
    }
    for site in 0..grid.n_sites() {
        let (up, dn) = (mode(site, Spin::Up), mode(site, Spin::Down));
        h.add_term(
            Complex64::new(params.u, 0.0),
            &[
                Ladder::create(up),
                Ladder::create(dn),
                Ladder::annihilate(dn),
                Ladder::annihilate(up),
            ],
        )?;
    }
    for m in 0..n {
        h.add_term(
            Complex64::new(-params.mu, 0.0),
            &[Ladder::create(m), Ladder::annihilate(m)],
        )?;
    }
    Ok(h)
}

/// Canonical label of a pool generator.
///
/// `OneBody { p, q }` stands for `T = c+_p c_q` with `p < q`;
/// `TwoBody { p, q, r, s }` for `T = c+_p c+_q c_r c_s` with `p < q`,
/// `r < s` and `(p, q) < (r, s)`. The derived ordering (one-body first, then
/// lexicographic) is the tie-break order of the adaptive loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OperatorDescriptor {
    OneBody { p: usize, q: usize },
    TwoBody { p: usize, q: usize, r: usize, s: usize },
}

impl OperatorDescriptor {
    /// Ladder product `T` (rightmost acts first).
    pub fn excitation(&self) -> Vec<Ladder> {
        match *self {
            OperatorDescriptor::OneBody { p, q } => alloc::vec![Ladder::create(p), Ladder::annihilate(q)],
            OperatorDescriptor::TwoBody { p, q, r, s } => alloc::vec![
                Ladder::create(p),
                Ladder::create(q),
                Ladder::annihilate(r),
                Ladder::annihilate(s),
            ],
        }
    }

    pub fn modes(&self) -> Vec<usize> {
        match *self {
            OperatorDescriptor::OneBody { p, q } => alloc::vec![p, q],
            OperatorDescriptor::TwoBody { p, q, r, s } => alloc::vec![p, q, r, s],
        }
    }

    pub fn max_mode(&self) -> usize {
        self.modes().into_iter().max().unwrap_or(0)
    }

    /// Checks canonical index order and spin conservation.
    pub fn validate(&self, n_modes: usize) -> Result<()> {
        if self.max_mode() >= n_modes {
            return Err(Error::validation(alloc::format!("{self} references a mode beyond {n_modes}")));
        }
        let ok = match *self {
            OperatorDescriptor::OneBody { p, q } => p < q && is_down(p) == is_down(q),
            OperatorDescriptor::TwoBody { p, q, r, s } => {
                let downs = |a: usize, b: usize| is_down(a) as usize + is_down(b) as usize;
                p < q && r < s && (p, q) < (r, s) && downs(p, q) == downs(r, s)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::validation(alloc::format!("{self} is not a canonical spin-conserving generator")))
        }
    }

    /// Hermitian generator `A = i (T† - T)`, so that `exp(i theta A)` is the
    /// real rotation `exp(theta (T - T†))`.
    pub fn generator(&self, n_modes: usize) -> Result<FermionOperator> {
        self.validate(n_modes)?;
        let t = FermionOperator::term(n_modes, Complex64::new(1.0, 0.0), &self.excitation())?;
        let i = Complex64::new(0.0, 1.0);
        t.adjoint().minus(&t).map(|d| d.scaled(i))
    }
}

impl fmt::Display for OperatorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            OperatorDescriptor::OneBody { p, q } => write!(f, "one({p},{q})"),
            OperatorDescriptor::TwoBody { p, q, r, s } => write!(f, "two({p},{q},{r},{s})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoolOperator {
    pub descriptor: OperatorDescriptor,
    pub generator: FermionOperator,
}

/// All spin-conserving one- and two-body generators on `n_sites` sites, in
/// canonical descriptor order. One-body terms couple every same-spin pair,
/// not only nearest neighbours. Two-body terms whose creation and
/// annihilation index pairs coincide are number operators and are left out.
pub fn build_pool(n_sites: usize) -> Result<Vec<PoolOperator>> {
    let n_modes = 2 * n_sites;
    if n_sites > MAX_SITES {
        return Err(Error::Resource {
            what: "pool sites",
            requested: n_sites,
            limit: MAX_SITES,
        });
    }
    let descriptors = pool_descriptors(n_modes);
    descriptors
        .into_iter()
        .map(|d| {
            Ok(PoolOperator {
                descriptor: d,
                generator: d.generator(n_modes)?,
            })
        })
        .collect()
}

/// Canonical descriptors only, without building generators.
pub fn pool_descriptors(n_modes: usize) -> Vec<OperatorDescriptor> {
    let mut out = Vec::new();
    for p in 0..n_modes {
        for q in p + 1..n_modes {
            if is_down(p) == is_down(q) {
                out.push(OperatorDescriptor::OneBody { p, q });
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n_modes)
        .flat_map(|p| (p + 1..n_modes).map(move |q| (p, q)))
        .collect();
    for (a, &(p, q)) in pairs.iter().enumerate() {
        for &(r, s) in &pairs[a + 1..] {
            let d = OperatorDescriptor::TwoBody { p, q, r, s };
            if d.validate(n_modes).is_ok() {
                out.push(d);
            }
        }
    }
    out
}

/// `c_{k, spin}` for a chain. Periodic chains use plane waves
/// `exp(-2 pi i k x / L) / sqrt(L)`; open chains use the standing waves
/// `sqrt(2 / (L + 1)) sin(pi (k + 1)(x + 1) / (L + 1))`.
pub fn momentum_mode(k_index: usize, spin: Spin, grid: &GridSpec) -> Result<FermionOperator> {
    let (len, periodic) = grid
        .chain()
        .ok_or_else(|| Error::Geometry(alloc::format!("momentum modes need a chain, got {grid}")))?;
    if k_index >= len {
        return Err(Error::validation(alloc::format!("k index {k_index} out of range for length {len}")));
    }
    let n = grid.n_modes();
    let mut op = FermionOperator::zero(n);
    for x in 0..len {
        let amp = if periodic {
            let phase = -2.0 * PI * (k_index * x) as f64 / len as f64;
            Complex64::new(libm::cos(phase), libm::sin(phase)) / libm::sqrt(len as f64)
        } else {
            let l1 = (len + 1) as f64;
            let v = libm::sqrt(2.0 / l1) * libm::sin(PI * (k_index + 1) as f64 * (x + 1) as f64 / l1);
            Complex64::new(v, 0.0)
        };
        op.add_term(amp, &[Ladder::annihilate(mode(x, spin))])?;
    }
    Ok(op)
}

/// Product-state occupation that spreads electrons evenly over the grid.
///
/// When every electron fits on its own site, sites are picked at evenly
/// spaced positions; checkerboard-even sites take the up spins first, which
/// gives a Neel pattern at half filling. Otherwise every site is occupied and
/// the excess down electrons double up from the end of the same ordering.
pub fn spread_occupation(grid: &GridSpec, n_up: usize, n_down: usize) -> Result<Vec<usize>> {
    let n_sites = grid.n_sites();
    if n_up > n_sites || n_down > n_sites {
        return Err(Error::validation(alloc::format!(
            "sector ({n_up}, {n_down}) does not fit on {n_sites} sites"
        )));
    }
    let electrons = n_up + n_down;
    let parity = |s: usize| {
        let (x, y) = grid.coords(s);
        (x + y) % 2
    };
    let mut modes = Vec::with_capacity(electrons);
    if electrons <= n_sites {
        let mut sites: Vec<usize> = if electrons <= 1 {
            (0..electrons).collect()
        } else {
            (0..electrons)
                .map(|m| libm::round(m as f64 * (n_sites - 1) as f64 / (electrons - 1) as f64) as usize)
                .collect()
        };
        sites.sort_by_key(|&s| (parity(s), s));
        for (k, &s) in sites.iter().enumerate() {
            let spin = if k < n_up { Spin::Up } else { Spin::Down };
            modes.push(mode(s, spin));
        }
    } else {
        let mut sites: Vec<usize> = (0..n_sites).collect();
        sites.sort_by_key(|&s| (parity(s), s));
        for &s in sites.iter().take(n_up) {
            modes.push(mode(s, Spin::Up));
        }
        for &s in sites.iter().rev().take(n_down) {
            modes.push(mode(s, Spin::Down));
        }
    }
    modes.sort_unstable();
    Ok(modes)
}
