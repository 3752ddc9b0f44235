fn main() {
    std::process::exit(lrjcalc::cli::main());
}
