"""Three-link elastic microswimmer: simulation, asymptotics and geometric control checks."""
