//! Minimal C ABI over the Clarabel conic solver.
//!
//! Problem form: minimize q'x subject to A x + s = b, s in K, where K is a
//! product of cones given in row order. Cone tags: 0 = zero cone,
//! 1 = nonnegative orthant, 2 = second-order cone, 3 = exponential cone
//! (dim must be 3).

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

const STATUS_SOLVED: i32 = 0;
const STATUS_ALMOST_SOLVED: i32 = 1;
const STATUS_PRIMAL_INFEASIBLE: i32 = 2;
const STATUS_DUAL_INFEASIBLE: i32 = 3;
const STATUS_MAX_ITERATIONS: i32 = 6;
const STATUS_NUMERICAL_ERROR: i32 = 8;
const STATUS_OTHER: i32 = 10;
const STATUS_BAD_INPUT: i32 = -1;

/// # Safety
/// All pointers must reference arrays of the documented lengths.
#[no_mangle]
pub unsafe extern "C" fn clarabel_ffi_solve(
    n: i64,
    q: *const f64,
    m: i64,
    colptr: *const i64,
    rowind: *const i64,
    vals: *const f64,
    b: *const f64,
    ncones: i64,
    cone_tags: *const i64,
    cone_dims: *const i64,
    max_iter: i64,
    tol_gap_abs: f64,
    tol_gap_rel: f64,
    tol_feas: f64,
    verbose: i32,
    x_out: *mut f64,
    obj_out: *mut f64,
    iters_out: *mut i64,
) -> i32 {
    if n < 0 || m < 0 || ncones < 0 {
        return STATUS_BAD_INPUT;
    }
    let n = n as usize;
    let m = m as usize;
    let ncones = ncones as usize;

    let q = std::slice::from_raw_parts(q, n).to_vec();
    let colptr: Vec<usize> = std::slice::from_raw_parts(colptr, n + 1)
        .iter()
        .map(|&v| v as usize)
        .collect();
    let nnz = colptr[n];
    let rowind: Vec<usize> = std::slice::from_raw_parts(rowind, nnz)
        .iter()
        .map(|&v| v as usize)
        .collect();
    let vals = std::slice::from_raw_parts(vals, nnz).to_vec();
    let b = std::slice::from_raw_parts(b, m).to_vec();

    let tags = std::slice::from_raw_parts(cone_tags, ncones);
    let dims = std::slice::from_raw_parts(cone_dims, ncones);
    let mut cones: Vec<SupportedConeT<f64>> = Vec::with_capacity(ncones);
    let mut total_rows = 0usize;
    for i in 0..ncones {
        let dim = dims[i] as usize;
        total_rows += dim;
        match tags[i] {
            0 => cones.push(SupportedConeT::ZeroConeT(dim)),
            1 => cones.push(SupportedConeT::NonnegativeConeT(dim)),
            2 => cones.push(SupportedConeT::SecondOrderConeT(dim)),
            3 => {
                if dim != 3 {
                    return STATUS_BAD_INPUT;
                }
                cones.push(SupportedConeT::ExponentialConeT());
            }
            _ => return STATUS_BAD_INPUT,
        }
    }
    if total_rows != m {
        return STATUS_BAD_INPUT;
    }

    let p = CscMatrix::<f64>::zeros((n, n));
    let a = CscMatrix::new(m, n, colptr, rowind, vals);

    let mut settings = DefaultSettings::<f64>::default();
    settings.verbose = verbose != 0;
    settings.max_iter = max_iter.max(1) as u32;
    settings.tol_gap_abs = tol_gap_abs;
    settings.tol_gap_rel = tol_gap_rel;
    settings.tol_feas = tol_feas;

    let mut solver = match DefaultSolver::new(&p, &q, &a, &b, &cones, settings) {
        Ok(s) => s,
        Err(_) => return STATUS_BAD_INPUT,
    };
    solver.solve();

    let sol = &solver.solution;
    for (i, v) in sol.x.iter().enumerate().take(n) {
        *x_out.add(i) = *v;
    }
    *obj_out = sol.obj_val;
    *iters_out = solver.info.iterations as i64;

    match sol.status {
        SolverStatus::Solved => STATUS_SOLVED,
        SolverStatus::AlmostSolved => STATUS_ALMOST_SOLVED,
        SolverStatus::PrimalInfeasible => STATUS_PRIMAL_INFEASIBLE,
        SolverStatus::DualInfeasible => STATUS_DUAL_INFEASIBLE,
        SolverStatus::AlmostPrimalInfeasible => STATUS_PRIMAL_INFEASIBLE,
        SolverStatus::AlmostDualInfeasible => STATUS_DUAL_INFEASIBLE,
        SolverStatus::MaxIterations => STATUS_MAX_ITERATIONS,
        SolverStatus::NumericalError | SolverStatus::InsufficientProgress => {
            STATUS_NUMERICAL_ERROR
        }
        _ => STATUS_OTHER,
    }
}
