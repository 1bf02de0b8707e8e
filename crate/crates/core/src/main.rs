fn main() {
    std::process::exit(rtc_core::cli::main());
}
