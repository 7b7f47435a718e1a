use clap::Parser;

fn main() {
    let args = mdp_reach::cli::Args::parse();
    std::process::exit(mdp_reach::cli::main_with(args));
}
