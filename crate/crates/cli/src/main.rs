fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(dirac_ee_cli::run(&args));
}
