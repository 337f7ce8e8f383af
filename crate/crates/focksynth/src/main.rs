use clap::Parser;

fn main() {
    if let Ok(threads) = std::env::var("FOCKSYNTH_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            // ignore failure if a global pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = focksynth::cli::Cli::parse();
    std::process::exit(focksynth::cli::run(cli));
}
