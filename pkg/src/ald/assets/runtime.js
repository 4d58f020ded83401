// Placeholder runtime. The real cell runtime is built separately (see
// frontend/) and dropped in with `ald build ... --assets frontend/dist`.
// Pages stay readable without it; cells simply render as listings.
console.info("ald: no interactive runtime bundled with this site");
