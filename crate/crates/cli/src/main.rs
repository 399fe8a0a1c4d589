fn main() {
    cvcluster_cli::placeholder();
}
