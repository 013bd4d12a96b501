use std::path::{Path, PathBuf};
use std::process::Command;

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn compiler() -> String {
    std::env::var("CC").unwrap_or_else(|_| "cc".into())
}

#[test]
fn header_is_valid_c() {
    let status = Command::new(compiler())
        .args(["-fsyntax-only", "-Wall", "-Werror", "-xc"])
        .arg(header_dir().join("dwgm.h"))
        .status()
        .expect("C compiler available");
    assert!(status.success());
}

#[test]
fn header_is_valid_cpp() {
    let status = Command::new("c++")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-xc++"])
        .arg(header_dir().join("dwgm.h"))
        .status()
        .expect("C++ compiler available");
    assert!(status.success());
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "dwgm.h"

int main(void) {
    double v = 0.0;
    if (dwgm_dw_cdf(0, 0.7, 1.5, &v) != DWGM_STATUS_OK || v < 0.2999 || v > 0.3001) return 1;
    if (dwgm_dw_cdf(0, 2.0, 1.5, &v) != DWGM_STATUS_DOMAIN) return 2;
    if (strlen(dwgm_last_error_message()) == 0) return 3;
    uint64_t q = 0;
    if (dwgm_dw_quantile(0.25, 0.7, 1.5, &q) != DWGM_STATUS_OK || q != 0) return 4;

    uint64_t counts[20 * 3];
    for (int i = 0; i < 20; i++) {
        counts[i * 3 + 0] = (uint64_t)(i % 5);
        counts[i * 3 + 1] = (uint64_t)(i % 5 + i % 2);
        counts[i * 3 + 2] = (uint64_t)((i * 7) % 4);
    }
    DwgmDataset *ds = dwgm_dataset_new(counts, 20, 3, NULL, 0);
    if (!ds) return 5;
    DwgmOptions opt;
    dwgm_options_default(&opt);
    opt.iterations = 50;
    opt.chains = 1;
    opt.marginal = DWGM_MARGINAL_EMPIRICAL;
    DwgmResult *res = NULL;
    if (dwgm_learn_structure(ds, &opt, &res) != DWGM_STATUS_OK) {
        fprintf(stderr, "%s\n", dwgm_last_error_message());
        return 6;
    }
    if (dwgm_result_nodes(res) != 3) return 7;
    double probs[9];
    if (dwgm_result_edge_probabilities(res, probs, 9) != DWGM_STATUS_OK) return 8;
    if (dwgm_result_edge_probabilities(res, probs, 4) != DWGM_STATUS_SHAPE) return 9;
    for (int k = 0; k < 9; k++) if (probs[k] < 0.0 || probs[k] > 1.0) return 10;
    uint8_t truth[9] = {0, 1, 0, 1, 0, 0, 0, 0, 0};
    double auc = -1.0;
    if (dwgm_auc(probs, truth, 3, &auc) != DWGM_STATUS_OK || auc < 0.0 || auc > 1.0) return 11;
    dwgm_result_free(res);
    dwgm_dataset_free(ds);
    printf("ok\n");
    return 0;
}
"#;

/// Directory holding the built `libdwgm_ffi.a`.
fn library_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = library_dir().join("libdwgm_ffi.a");
    if !lib.exists() {
        panic!("static library not found at {}", lib.display());
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(compiler())
        .arg(&src)
        .arg("-I")
        .arg(header_dir())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "compile/link failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
