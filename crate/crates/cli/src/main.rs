fn main() {
    eprintln!("hexglass: command-line harness not yet wired up");
    std::process::exit(2);
}
