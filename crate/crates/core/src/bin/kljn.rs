fn main() {
    std::process::exit(i32::from(kljn_core::cli::main_exit()));
}
