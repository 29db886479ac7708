use std::process::exit;

fn main() {
    // Die quietly when a downstream pipe closes (e.g. `... scan | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    exit(pellstairs::cli::run(std::env::args_os()));
}
