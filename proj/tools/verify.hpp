#pragma once

// Quick self-checks behind `loro verify`: environment arithmetic against
// inline oracles, extraction rules, gradient finite differences, replay
// statistics, and seeded reproducibility. Returns the number of failures.
int run_verify_checks();
