//! Terminal entry point.

fn main() {
    std::process::exit(jadoc::run_cli());
}
