//! Reading and writing topology and demand files.

use ncopt::model::{builtin_cost239, generate_demands, load_demands, load_topology, render_demands};

fn main() -> ncopt::Result<()> {
    let text = "\
# triangle with one expensive fiber
topology tri wdm
node 1
node 2
node 3
link 0 1 2 1 4
link 1 2 1 1 4
link 2 2 3 1 4
link 3 3 2 1 4
link 4 1 3 5 4
link 5 3 1 5 4
";
    let tri = load_topology(text)?;
    println!(
        "{}: {} fibers, bridges {:?}",
        tri.name(),
        tri.edges().len(),
        tri.bridges()
    );
    print!("{}", tri.render());

    match load_topology("topology bad wdm\nnode 1\nlink 0 1 2 1 4\n") {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected: {e}"),
    }

    let demands = generate_demands(&builtin_cost239(8), 3, 7, 4);
    let rendered = render_demands(&demands);
    print!("{rendered}");
    assert_eq!(load_demands(&rendered)?, demands);
    Ok(())
}
