#pragma once

#include "run_config.hpp"

namespace glcli {

// Each runner resolves its config (defaults < config file < flags/env),
// writes the resolved config plus its outputs under --out, and throws
// SelfCheckFailure when an embedded consistency check fails.
int cmd_moments(const CommonOptions& opts);
int cmd_simulate(const CommonOptions& opts);
int cmd_wild(const CommonOptions& opts);
int cmd_diffuse(const CommonOptions& opts);
int cmd_converge(const CommonOptions& opts);
int cmd_first_order(const CommonOptions& opts);
int cmd_metric(const CommonOptions& opts);

}  // namespace glcli
