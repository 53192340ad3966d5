//! Compile and run a small C program against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "celsim.h"

int main(void) {
    CelParams *p = cel_params_new_default();
    CelSteadyPhotons s;
    if (cel_steady_photons(p, &s) != CEL_STATUS_OK) {
        fprintf(stderr, "%s\n", cel_last_error_message());
        return 1;
    }
    if (cel_params_set(p, "kappa2", -1.0) != CEL_STATUS_INVALID_PARAMS) return 2;
    if (cel_last_error_message() == NULL) return 3;
    cel_params_free(p);
    printf("%.6f %.6f\n", s.n1, s.n2);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // Test binaries live in <target>/<profile>/deps; the static library one level up.
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libcelsim_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("a C compiler is available as `cc`");
    assert!(status.success());

    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    let n: Vec<f64> = text.split_whitespace().map(|x| x.parse().unwrap()).collect();
    let s = celsim::reduced::steady_photon_numbers(&celsim::model::default_working_point()).unwrap();
    assert!((n[0] - s.n1).abs() < 1e-6 && (n[1] - s.n2).abs() < 1e-6, "{text}");
}
