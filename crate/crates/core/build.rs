fn main() {
    // geev bindings in src/scalar.rs resolve against the system LAPACK.
    println!("cargo:rustc-link-lib=dylib=lapack");
}
