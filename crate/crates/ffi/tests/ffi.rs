use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use tfch_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe { tfch_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf
        .iter()
        .take_while(|&&c| c != 0)
        .map(|&c| c as u8)
        .collect();
    String::from_utf8(bytes).unwrap()
}

fn graded(n: usize) -> *mut TfchMesh {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { tfch_mesh_graded_cubic(n, 1.0, &mut m) },
        TfchStatus::Ok
    );
    m
}

#[test]
fn constants_and_errors() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(tfch_rho_star(0.82265, &mut v), TfchStatus::Ok);
        assert!((v - 4.7476114).abs() < 1e-4);
        assert_eq!(tfch_theta(0.5, &mut v), TfchStatus::Ok);
        assert!(v > 0.0);
        let (mut r, mut a) = (0.0, 0.0);
        assert_eq!(tfch_rho_bar(&mut r, &mut a), TfchStatus::Ok);
        assert!((r - 4.7476114).abs() < 1e-4 && (a - 0.82265).abs() < 1e-4);
        assert_eq!(tfch_rho_star(0.0, &mut v), TfchStatus::InvalidArgument);
        assert!(last_error().contains("alpha"));
        assert_eq!(tfch_rho_star(0.5, ptr::null_mut()), TfchStatus::NullPointer);
        assert_eq!(tfch_rho_star(0.5, &mut v), TfchStatus::Ok);
        assert_eq!(last_error(), "");
    }
}

#[test]
fn mesh_handles() {
    unsafe {
        let m = graded(10);
        assert_eq!(tfch_mesh_len(m), 10);
        let mut nodes = vec![0.0; 11];
        assert_eq!(
            tfch_mesh_nodes(m, nodes.as_mut_ptr(), 5),
            TfchStatus::BufferTooSmall
        );
        assert_eq!(tfch_mesh_nodes(m, nodes.as_mut_ptr(), 11), TfchStatus::Ok);
        assert_eq!(nodes[0], 0.0);
        assert_eq!(nodes[10], 1.0);
        let mut ok = false;
        assert_eq!(tfch_mesh_ratio_bound_ok(m, 0.5, &mut ok), TfchStatus::Ok);
        assert!(ok);
        tfch_mesh_free(m);
        tfch_mesh_free(ptr::null_mut());
        assert_eq!(tfch_mesh_len(ptr::null()), 0);

        let steps = [0.1, 0.2, -0.3];
        let mut c = ptr::null_mut();
        assert_eq!(
            tfch_mesh_custom(steps.as_ptr(), 3, &mut c),
            TfchStatus::InvalidArgument
        );
        assert!(c.is_null());
        assert_eq!(tfch_mesh_custom(steps.as_ptr(), 2, &mut c), TfchStatus::Ok);
        assert_eq!(tfch_mesh_len(c), 2);
        tfch_mesh_free(c);
        let mut u = ptr::null_mut();
        assert_eq!(
            tfch_mesh_uniform(0, 1.0, &mut u),
            TfchStatus::InvalidArgument
        );
    }
}

#[test]
fn kernels_and_caputo_agree_with_core() {
    unsafe {
        let m = graded(16);
        let mut b = vec![0.0; 16];
        assert_eq!(
            tfch_kernel_row_b(m, 0.4, 16, b.as_mut_ptr(), 16),
            TfchStatus::Ok
        );
        let mesh = tfch_core::mesh::TemporalMesh::graded_cubic(16, 1.0).unwrap();
        assert_eq!(b, tfch_core::caputo::kernel_row_b(16, &mesh, 0.4).unwrap());
        let w: Vec<f64> = mesh.nodes().iter().map(|t| t * t).collect();
        let mut v = 0.0;
        assert_eq!(
            tfch_apply_caputo(m, 0.4, w.as_ptr(), w.len(), &mut v),
            TfchStatus::Ok
        );
        assert_eq!(v, tfch_core::caputo::apply_caputo(&w, &mesh, 0.4).unwrap());
        assert_eq!(
            tfch_kernel_row_b(m, 0.4, 17, b.as_mut_ptr(), 16),
            TfchStatus::InvalidArgument
        );
        tfch_mesh_free(m);
    }
}

#[test]
fn solver_run_accessors() {
    unsafe {
        let m = graded(30);
        let p = tfch_params_default(0.6, 24);
        let mut run = ptr::null_mut();
        assert_eq!(tfch_solve(&p, m, &mut run), TfchStatus::Ok);
        assert_eq!(tfch_run_levels(run), 31);
        assert_eq!(tfch_run_state_len(run), 25);
        let mut u = vec![0.0; 25];
        assert_eq!(tfch_run_state(run, 30, u.as_mut_ptr(), 25), TfchStatus::Ok);
        assert_eq!(u[0], 0.0);
        assert!(u[12] > 0.0);
        assert_eq!(
            tfch_run_state(run, 31, u.as_mut_ptr(), 25),
            TfchStatus::InvalidArgument
        );
        let mut it = vec![0usize; 30];
        assert_eq!(
            tfch_run_iterations(run, it.as_mut_ptr(), 30),
            TfchStatus::Ok
        );
        assert!(it.iter().all(|&i| i >= 1));
        let (mut e, mut me, mut mass) = (vec![0.0; 31], vec![0.0; 31], vec![0.0; 31]);
        assert_eq!(
            tfch_run_energy(run, e.as_mut_ptr(), me.as_mut_ptr(), 31),
            TfchStatus::Ok
        );
        assert!(me[0].is_nan());
        assert!(me[2..].windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert_eq!(tfch_run_mass(run, mass.as_mut_ptr(), 31), TfchStatus::Ok);
        assert!(mass[0] > 0.0);
        tfch_run_free(run);

        let bad = TfchParams { m: 2, ..p };
        let mut r2 = ptr::null_mut();
        assert_eq!(tfch_solve(&bad, m, &mut r2), TfchStatus::InvalidArgument);
        let stuck = TfchParams {
            max_iterations: 1,
            iteration_tol: 1e-300,
            ..p
        };
        assert_eq!(tfch_solve(&stuck, m, &mut r2), TfchStatus::NonConvergence);
        assert!(r2.is_null());
        tfch_mesh_free(m);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("tfch.h")
}

fn cc() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc)
        .arg("--version")
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|_| cc)
}

#[test]
fn generated_header_is_valid_c() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "tfch_solve",
        "tfch_mesh_free",
        "TfchStatus",
        "TFCH_STATUS_BUFFER_TOO_SMALL",
        "typedef struct TfchRun TfchRun",
    ] {
        assert!(text.contains(name), "{name}");
    }
    let Some(cc) = cc() else {
        eprintln!("no C compiler found; skipping syntax check");
        return;
    };
    let mut child = Command::new(cc)
        .args([
            "-std=c99",
            "-Wall",
            "-Wextra",
            "-Werror",
            "-pedantic",
            "-fsyntax-only",
            "-x",
            "c",
            "-I",
        ])
        .arg(header().parent().unwrap())
        .arg("-")
        .stdin(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"#include \"tfch.h\"\n#include \"tfch.h\"\nint main(void) { return 0; }\n")
        .unwrap();
    let st = child.wait().unwrap();
    assert!(st.success());
}

#[test]
fn c_program_links_against_static_library() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler found; skipping link test");
        return;
    };
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libtfch_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping link test", lib.display());
        return;
    }
    let dir = tempfile_dir();
    let exe = dir.join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let st = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .status()
        .unwrap();
    assert!(st.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok 41 levels"));
    let _ = std::fs::remove_dir_all(dir);
}

fn tempfile_dir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("tfch-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
