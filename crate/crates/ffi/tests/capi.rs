use std::ptr;

use rankmf_ffi::*;

fn last_error() -> Option<String> {
    unsafe { message(rankmf_last_error()) }
}

#[test]
fn model_problem_round_trip() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(rankmf_matrix_model(RankmfModel::Poisson2d, 15, &mut m), RankmfStatus::Ok);
        let (mut rows, mut cols, mut nnz) = (0, 0, 0);
        assert_eq!(rankmf_matrix_shape(m, &mut rows, &mut cols, &mut nnz), RankmfStatus::Ok);
        assert_eq!((rows, cols), (225, 225));

        let mut f = ptr::null_mut();
        assert_eq!(rankmf_factorize(m, ptr::null(), &mut f), RankmfStatus::Ok);
        assert!(rankmf_factor_entries(f) > nnz);

        let ones = vec![1.0; rows];
        let mut b = vec![0.0; rows];
        assert_eq!(rankmf_matrix_matvec(m, ones.as_ptr(), b.as_mut_ptr()), RankmfStatus::Ok);
        let mut x = vec![0.0; rows];
        assert_eq!(rankmf_factor_solve(f, b.as_ptr(), x.as_mut_ptr(), rows), RankmfStatus::Ok);
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-10));

        let mut res = RankmfGmresResult::default();
        let mut y = vec![0.0; rows];
        let st = rankmf_gmres(m, f, b.as_ptr(), y.as_mut_ptr(), rows, 1e-10, 50, 100, &mut res);
        assert_eq!(st, RankmfStatus::Ok);
        assert_eq!(res.iterations, 1);
        assert!(res.converged);

        rankmf_factor_free(f);
        rankmf_matrix_free(m);
    }
}

#[test]
fn blr_policy_via_gmres() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(rankmf_matrix_model(RankmfModel::Poisson2d, 31, &mut m), RankmfStatus::Ok);
        let mut p = rankmf_policy_default();
        p.compression = RankmfCompression::Blr;
        p.threshold_dense = 64;
        p.tol = 1e-4;
        let mut f = ptr::null_mut();
        assert_eq!(rankmf_factorize(m, &p, &mut f), RankmfStatus::Ok);
        let b = vec![1.0; 961];
        let mut x = vec![0.0; 961];
        let mut res = RankmfGmresResult::default();
        assert_eq!(rankmf_gmres(m, f, b.as_ptr(), x.as_mut_ptr(), 961, 1e-8, 50, 50, &mut res), RankmfStatus::Ok);
        assert!(res.relative_residual <= 1e-8);
        rankmf_factor_free(f);
        rankmf_matrix_free(m);
    }
}

#[test]
fn csc_and_errors() {
    unsafe {
        let cs = [0usize, 1, 2];
        let ri = [0usize, 1];
        let v = [2.0, 4.0];
        let mut m = ptr::null_mut();
        assert_eq!(rankmf_matrix_from_csc(2, 2, cs.as_ptr(), ri.as_ptr(), v.as_ptr(), &mut m), RankmfStatus::Ok);
        let mut f = ptr::null_mut();
        assert_eq!(rankmf_factorize(m, ptr::null(), &mut f), RankmfStatus::Ok);
        let b = [2.0, 2.0];
        let mut x = [0.0; 2];
        assert_eq!(rankmf_factor_solve(f, b.as_ptr(), x.as_mut_ptr(), 3), RankmfStatus::Dimension);
        assert!(last_error().unwrap().contains("dimension"));
        assert_eq!(rankmf_factor_solve(f, b.as_ptr(), x.as_mut_ptr(), 2), RankmfStatus::Ok);
        assert_eq!(x, [1.0, 0.5]);
        assert!(last_error().is_none());
        rankmf_factor_free(f);
        rankmf_matrix_free(m);

        let bad_rows = [0usize, 2];
        let mut m = ptr::null_mut();
        let st = rankmf_matrix_from_csc(2, 2, cs.as_ptr(), bad_rows.as_ptr(), v.as_ptr(), &mut m);
        assert_eq!(st, RankmfStatus::InvalidArgument);
        assert!(m.is_null());
        assert!(last_error().unwrap().contains("out of range"));

        assert_eq!(rankmf_factorize(ptr::null(), ptr::null(), &mut f), RankmfStatus::NullPointer);
        assert_eq!(rankmf_matrix_model(RankmfModel::Poisson2d, 3, ptr::null_mut()), RankmfStatus::NullPointer);
        rankmf_matrix_free(ptr::null_mut());
        rankmf_factor_free(ptr::null_mut());
    }
}

#[test]
fn singular_and_parse_failures() {
    unsafe {
        let text = b"%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n";
        let mut m = ptr::null_mut();
        assert_eq!(rankmf_matrix_from_matrix_market(text.as_ptr(), text.len(), &mut m), RankmfStatus::Ok);
        let mut f = ptr::null_mut();
        assert_eq!(rankmf_factorize(m, ptr::null(), &mut f), RankmfStatus::Singular);
        assert!(f.is_null());
        rankmf_matrix_free(m);

        let junk = b"%%MatrixMarket matrix array real general\n";
        assert_eq!(rankmf_matrix_from_matrix_market(junk.as_ptr(), junk.len(), &mut m), RankmfStatus::Parse);
        assert!(last_error().unwrap().contains("line 1"));
    }
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rankmf.h")).unwrap();
    for sym in ["rankmf_factorize", "rankmf_gmres", "rankmf_last_error", "RANKMF_STATUS_NOT_CONVERGED", "typedef struct RankmfMatrix RankmfMatrix"] {
        assert!(h.contains(sym), "{sym} missing from header");
    }
    let v = unsafe { message(rankmf_version()) }.unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
