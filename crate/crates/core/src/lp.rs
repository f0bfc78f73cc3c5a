//! Self-contained dense linear programming for the minimax split
//! certificates: a two-phase primal simplex adequate for a few hundred rows,
//! and the Chebyshev-style formulation of the best monotone convex+concave
//! approximation of a grid function.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// minimize `objective . x` subject to the rows and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Cmp, f64)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-8;

/// Dense two-phase simplex. Dantzig pricing with a switch to Bland's rule
/// after a long degenerate stretch, which guarantees termination.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.objective.len();
    let m = lp.rows.len();
    for (row, _, _) in &lp.rows {
        assert_eq!(row.len(), n, "row length mismatch");
    }

    // normalize to b >= 0
    let mut rows: Vec<(Vec<f64>, Cmp, f64)> = lp.rows.clone();
    for (coef, cmp, b) in &mut rows {
        if *b < 0.0 {
            for c in coef.iter_mut() {
                *c = -*c;
            }
            *b = -*b;
            *cmp = match *cmp {
                Cmp::Le => Cmp::Ge,
                Cmp::Ge => Cmp::Le,
                Cmp::Eq => Cmp::Eq,
            };
        }
    }

    // column layout: structural | slack/surplus | artificial
    let mut n_slack = 0;
    let mut n_art = 0;
    for (_, cmp, _) in &rows {
        match cmp {
            Cmp::Le => n_slack += 1,
            Cmp::Ge => {
                n_slack += 1;
                n_art += 1;
            }
            Cmp::Eq => n_art += 1,
        }
    }
    let ncols = n + n_slack + n_art;
    let width = ncols + 1; // + rhs
    let mut t = vec![0.0f64; (m + 1) * width];
    let idx = |r: usize, c: usize| r * width + c;
    let mut basis = vec![usize::MAX; m];
    let mut art_cols = Vec::with_capacity(n_art);

    let mut slack_at = n;
    let mut art_at = n + n_slack;
    for (r, (coef, cmp, b)) in rows.iter().enumerate() {
        for (c, v) in coef.iter().enumerate() {
            t[idx(r, c)] = *v;
        }
        t[idx(r, ncols)] = *b;
        match cmp {
            Cmp::Le => {
                t[idx(r, slack_at)] = 1.0;
                basis[r] = slack_at;
                slack_at += 1;
            }
            Cmp::Ge => {
                t[idx(r, slack_at)] = -1.0;
                slack_at += 1;
                t[idx(r, art_at)] = 1.0;
                basis[r] = art_at;
                art_cols.push(art_at);
                art_at += 1;
            }
            Cmp::Eq => {
                t[idx(r, art_at)] = 1.0;
                basis[r] = art_at;
                art_cols.push(art_at);
                art_at += 1;
            }
        }
    }

    // phase 1: minimize sum of artificials
    if n_art > 0 {
        for &c in &art_cols {
            t[idx(m, c)] = 1.0;
        }
        for r in 0..m {
            if art_cols.contains(&basis[r]) {
                // make the cost row consistent with the basic artificials
                for c in 0..width {
                    t[idx(m, c)] -= t[idx(r, c)];
                }
            }
        }
        run_simplex(&mut t, &mut basis, m, ncols, width, None)?;
        if -t[idx(m, ncols)] > FEAS_EPS {
            return Err(Error::LpInfeasible);
        }
        // pivot any artificial still sitting in the basis out of it
        for r in 0..m {
            if art_cols.contains(&basis[r]) {
                let mut done = false;
                for c in 0..(n + n_slack) {
                    if t[idx(r, c)].abs() > PIVOT_EPS {
                        pivot(&mut t, &mut basis, m, width, r, c);
                        done = true;
                        break;
                    }
                }
                if !done {
                    // redundant row; the artificial stays basic at zero
                    t[idx(r, ncols)] = 0.0;
                }
            }
        }
    }

    // phase 2: real objective
    for c in 0..width {
        t[idx(m, c)] = 0.0;
    }
    for (c, v) in lp.objective.iter().enumerate() {
        t[idx(m, c)] = *v;
    }
    for r in 0..m {
        let b = basis[r];
        let cost = t[idx(m, b)];
        if cost != 0.0 {
            for c in 0..width {
                t[idx(m, c)] -= cost * t[idx(r, c)];
            }
        }
    }
    let blocked: Vec<usize> = art_cols;
    run_simplex(&mut t, &mut basis, m, ncols, width, Some(&blocked))?;

    let mut x = vec![0.0; n];
    for r in 0..m {
        if basis[r] < n {
            x[basis[r]] = t[idx(r, ncols)];
        }
    }
    let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { objective, x })
}

fn pivot(t: &mut [f64], basis: &mut [usize], m: usize, width: usize, prow: usize, pcol: usize) {
    let idx = |r: usize, c: usize| r * width + c;
    let p = t[idx(prow, pcol)];
    for c in 0..width {
        t[idx(prow, c)] /= p;
    }
    for r in 0..=m {
        if r == prow {
            continue;
        }
        let factor = t[idx(r, pcol)];
        if factor != 0.0 {
            for c in 0..width {
                t[idx(r, c)] -= factor * t[idx(prow, c)];
            }
            t[idx(r, pcol)] = 0.0;
        }
    }
    basis[prow] = pcol;
}

fn run_simplex(
    t: &mut [f64],
    basis: &mut [usize],
    m: usize,
    ncols: usize,
    width: usize,
    blocked: Option<&[usize]>,
) -> Result<()> {
    let idx = |r: usize, c: usize| r * width + c;
    let is_blocked = |c: usize| blocked.map_or(false, |b| b.contains(&c));
    let mut degenerate_run = 0usize;
    let bland_after = 40 * (m + ncols);
    let max_iters = 2000 * (m + ncols) + 20_000;
    for _ in 0..max_iters {
        // entering column
        let mut pcol = usize::MAX;
        if degenerate_run > bland_after {
            for c in 0..ncols {
                if !is_blocked(c) && t[idx(m, c)] < -PIVOT_EPS {
                    pcol = c;
                    break;
                }
            }
        } else {
            let mut best = -PIVOT_EPS;
            for c in 0..ncols {
                if !is_blocked(c) && t[idx(m, c)] < best {
                    best = t[idx(m, c)];
                    pcol = c;
                }
            }
        }
        if pcol == usize::MAX {
            return Ok(()); // optimal
        }
        // ratio test
        let mut prow = usize::MAX;
        let mut best_ratio = f64::INFINITY;
        for r in 0..m {
            let a = t[idx(r, pcol)];
            if a > PIVOT_EPS {
                let ratio = t[idx(r, ncols)] / a;
                if ratio < best_ratio - 1e-12
                    || (ratio < best_ratio + 1e-12 && prow != usize::MAX && basis[r] < basis[prow])
                {
                    best_ratio = ratio;
                    prow = r;
                }
            }
        }
        if prow == usize::MAX {
            return Err(Error::LpUnbounded);
        }
        if best_ratio.abs() < 1e-12 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        pivot(t, basis, m, width, prow, pcol);
    }
    Err(Error::LpUnbounded)
}

/// Which shape constraints the split enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Both parts increasing, first part convex, second part concave.
    ConvexConcave,
    /// Both parts increasing, no curvature constraints.
    MonotoneOnly,
}

/// Optimal minimax split of a grid function into an increasing-convex plus an
/// increasing-concave part (or increasing-only parts), with the certificate.
#[derive(Debug, Clone)]
pub struct SplitCertificate {
    pub grid: Vec<f64>,
    pub target: Vec<f64>,
    /// Values of the increasing convex part on the grid.
    pub convex_part: Vec<f64>,
    /// Values of the increasing concave part on the grid.
    pub concave_part: Vec<f64>,
    pub optimum: f64,
}

impl SplitCertificate {
    /// Largest absolute residual of the certificate itself.
    pub fn residual(&self) -> f64 {
        self.target
            .iter()
            .zip(self.convex_part.iter().zip(&self.concave_part))
            .map(|(f, (u, v))| (f - u - v).abs())
            .fold(0.0, f64::max)
    }
}

/// Best uniform approximation of `target` (sampled on any grid) by a sum of
/// two increasing grid functions, the first convex and the second concave
/// (by discrete first/second differences).
///
/// The reduced formulation parametrizes the convex part by its base value,
/// first slope and nonnegative slope increments, and the concave part by its
/// final slope and nonnegative slope decrements; monotonicity of a convex
/// increasing part is equivalent to a nonnegative first slope and of a
/// concave increasing part to a nonnegative last slope, so the feasible set
/// is exactly the direct one with `6N - 6` rows, at `2N` rows total.
pub fn monotone_split_lp(target: &[f64], mode: SplitMode) -> Result<SplitCertificate> {
    let n = target.len();
    if n < 3 {
        return Err(Error::InvalidArgument("grid needs at least 3 nodes".into()));
    }
    match mode {
        SplitMode::ConvexConcave => split_convex_concave(target),
        SplitMode::MonotoneOnly => split_monotone_only(target),
    }
}

fn split_convex_concave(target: &[f64]) -> Result<SplitCertificate> {
    let n = target.len();
    // variables: [bp, bm, eps, d1, e_1..e_{n-2}, q, w_1..w_{n-2}]
    let nv = 2 * n + 1;
    let e0 = 4; // first e index
    let qi = 4 + (n - 2);
    let w0 = qi + 1;
    let mut rows = Vec::with_capacity(2 * n);
    for i in 1..=n {
        let mut coef = vec![0.0; nv];
        coef[0] = 1.0; // bp
        coef[1] = -1.0; // bm
        let steps = (i - 1) as f64;
        coef[3] = steps; // d1
        for j in 1..=(n - 2) {
            let c = (i as isize - 1 - j as isize).max(0) as f64;
            coef[e0 + j - 1] = c;
        }
        coef[qi] = steps; // q
        for j in 1..=(n - 2) {
            coef[w0 + j - 1] = (j.min(i - 1)) as f64;
        }
        // S_i + eps >= f_i
        let mut up = coef.clone();
        up[2] = 1.0;
        rows.push((up, Cmp::Ge, target[i - 1]));
        // S_i - eps <= f_i
        let mut down = coef;
        down[2] = -1.0;
        rows.push((down, Cmp::Le, target[i - 1]));
    }
    let mut objective = vec![0.0; nv];
    objective[2] = 1.0;
    let sol = solve(&LinearProgram { objective, rows })?;

    // reconstruct the parts: the base goes to the convex part
    let base = sol.x[0] - sol.x[1];
    let d1 = sol.x[3];
    let q = sol.x[qi];
    let mut d = vec![d1];
    for j in 1..=(n - 2) {
        d.push(d[j - 1] + sol.x[e0 + j - 1]);
    }
    let mut g = vec![0.0; n - 1];
    g[n - 2] = q;
    for k in (0..(n - 2)).rev() {
        g[k] = g[k + 1] + sol.x[w0 + k];
    }
    let mut u = vec![base];
    for k in 0..(n - 1) {
        u.push(u[k] + d[k]);
    }
    let mut v = vec![0.0];
    for k in 0..(n - 1) {
        v.push(v[k] + g[k]);
    }
    Ok(SplitCertificate {
        grid: Vec::new(),
        target: target.to_vec(),
        convex_part: u,
        concave_part: v,
        optimum: sol.objective,
    })
}

fn split_monotone_only(target: &[f64]) -> Result<SplitCertificate> {
    let n = target.len();
    // variables: [bp, bm, eps, d_1..d_{n-1}, g_1..g_{n-1}]
    let nv = 3 + 2 * (n - 1);
    let d0 = 3;
    let g0 = 3 + (n - 1);
    let mut rows = Vec::with_capacity(2 * n);
    for i in 1..=n {
        let mut coef = vec![0.0; nv];
        coef[0] = 1.0;
        coef[1] = -1.0;
        for k in 1..i {
            coef[d0 + k - 1] = 1.0;
            coef[g0 + k - 1] = 1.0;
        }
        let mut up = coef.clone();
        up[2] = 1.0;
        rows.push((up, Cmp::Ge, target[i - 1]));
        let mut down = coef;
        down[2] = -1.0;
        rows.push((down, Cmp::Le, target[i - 1]));
    }
    let mut objective = vec![0.0; nv];
    objective[2] = 1.0;
    let sol = solve(&LinearProgram { objective, rows })?;
    let base = sol.x[0] - sol.x[1];
    let mut u = vec![base];
    let mut v = vec![0.0];
    for k in 0..(n - 1) {
        u.push(u[k] + sol.x[d0 + k]);
        v.push(v[k] + sol.x[g0 + k]);
    }
    Ok(SplitCertificate {
        grid: Vec::new(),
        target: target.to_vec(),
        convex_part: u,
        concave_part: v,
        optimum: sol.objective,
    })
}

/// The sine split on the uniform `n`-point grid over `[-pi/2, pi/2]`: the
/// discrete optimum is a valid lower bound on the continuum infimum, since
/// any feasible continuum pair restricts to a feasible grid pair.
pub fn sin_decomposition_lp(n: usize) -> Result<SplitCertificate> {
    if n < 3 {
        return Err(Error::InvalidArgument("grid needs at least 3 nodes".into()));
    }
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * (i as f64) / ((n - 1) as f64)
        })
        .collect();
    let target: Vec<f64> = grid.iter().map(|t| t.sin()).collect();
    let mut cert = monotone_split_lp(&target, SplitMode::ConvexConcave)?;
    cert.grid = grid;
    Ok(cert)
}
