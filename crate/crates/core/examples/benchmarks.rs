//! Small runs of the two built-in benchmarks, printed as CSV.
//! The CLI's `bench-footer` and `bench-delete` run the full-size versions.

use bullion::bench::{bench_delete, bench_footer, DeleteBenchParams, DeletePattern};

fn main() -> bullion::Result<()> {
    let footer = bench_footer(&[100, 2000], 21, 0)?;
    print!("{}", footer.to_csv()?);

    let p = DeleteBenchParams { pages_per_column: 20, ..DeleteBenchParams::default() };
    let delete = bench_delete(&p, &[DeletePattern::Clustered, DeletePattern::Scattered])?;
    print!("{}", delete.to_csv()?);
    Ok(())
}
