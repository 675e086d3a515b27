use clap::Parser;

fn main() {
    // QWELD_THREADS caps worker parallelism for kernel entries, solver
    // term batches and one-vs-rest training.
    if let Ok(value) = std::env::var("QWELD_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()
                    .ok();
            }
        }
    }
    let cli = qweld::cli::Cli::parse();
    std::process::exit(qweld::cli::run(cli));
}
