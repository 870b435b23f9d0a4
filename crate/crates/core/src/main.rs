fn main() { std::process::exit(ideocascade::cli::run()); }
