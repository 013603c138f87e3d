//! Compiles `tests/c/smoke.c` against the generated header, links it with
//! the static library built alongside this test, and runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

/// Directory holding the library artifacts of the current profile.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    // <target>/<profile>/deps/<test binary>
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = artifact_dir().join("libampenc_ffi.a");
    assert!(lib.is_file(), "static library not found at {}", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "smoke program failed: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains(&format!("ampenc {} ok", env!("CARGO_PKG_VERSION"))), "{stdout}");
}
