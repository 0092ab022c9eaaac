fn main() {
    let code = sds_core::cli::run(
        std::env::args_os(),
        std::env::var_os("SDS_OUT").map(Into::into),
    );
    std::process::exit(code);
}
