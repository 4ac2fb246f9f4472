fn main() {
    // placeholder until the library surface lands
    eprintln!("cliff7: not yet wired");
    std::process::exit(2);
}
