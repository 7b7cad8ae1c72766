#include "qmem/types.hpp"

#include <cmath>
#include <string>

#include "qmem/errors.hpp"

namespace qmem {

SimParams validate(const SimParams& params) {
    std::string problems;
    auto flag = [&problems](const char* msg) {
        if (!problems.empty()) problems += "; ";
        problems += msg;
    };
    auto finite = [&flag](double x, const char* msg) {
        if (!std::isfinite(x)) {
            flag(msg);
            return false;
        }
        return true;
    };

    if (finite(params.gamma0, "gamma0 must be finite") && !(params.gamma0 >= 0.0))
        flag("gamma0 must be non-negative");
    if (finite(params.epsilon, "epsilon must be finite") &&
        !(params.epsilon >= 0.0 && params.epsilon <= 1.0))
        flag("epsilon out of [0,1]");
    if (finite(params.lambda, "lambda must be finite") && !(params.lambda > 0.0))
        flag("lambda must be positive");
    if (finite(params.nu, "nu must be finite") && !(params.nu >= 0.0))
        flag("nu must be non-negative");
    if (finite(params.tau, "tau must be finite") && !(params.tau > 0.0))
        flag("tau must be positive");
    if (finite(params.dt, "dt must be finite") && !(params.dt > 0.0)) flag("dt must be positive");
    if (finite(params.t_final, "t_final must be finite") && !(params.t_final >= params.dt))
        flag("t_final must be at least dt");
    if (!(params.n_traj >= 1)) flag("n_traj must be at least 1");
    if (!(params.record_stride >= 1)) flag("record_stride must be at least 1");

    if (!problems.empty()) throw ConfigError("invalid parameters: " + problems);
    return params;
}

}  // namespace qmem
