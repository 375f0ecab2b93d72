use mimalloc::MiMalloc;

#[global_allocator]
static GLOBAL: MiMalloc = MiMalloc;

fn main() {
    sns_core::cli::configure_threads();
    std::process::exit(sns_core::cli::main_with_args(std::env::args_os()));
}
