fn main() -> std::process::ExitCode {
    splitfft_bench::cli::main()
}
