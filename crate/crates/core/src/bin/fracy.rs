fn main() {
    println!("fracy");
}
