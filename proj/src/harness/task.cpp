#include "mt3/harness/task.hpp"

#include <stdexcept>

namespace mt3::harness {

void TrainerConfig::validate() const {
    if (batch < 1) throw std::invalid_argument("trainer: batch must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("trainer: lr must be positive");
    if (patience < 1 || !(lr_divisor > 1.0)) throw std::invalid_argument("trainer: bad plateau schedule");
    if (max_steps < 0 || eval_every < 0 || checkpoint_every < 0)
        throw std::invalid_argument("trainer: step counts must be non-negative");
    if (eval_every > 0 && eval_scenarios < 1) throw std::invalid_argument("trainer: eval_scenarios must be >= 1");
    if (max_resamples < 1) throw std::invalid_argument("trainer: max_resamples must be >= 1");
}

void TaskSpec::validate() const {
    scenario.validate();
    model.validate();
    trainer.validate();
    if (!(beta > 0.0)) throw std::invalid_argument("task: beta must be positive");
    if (model.window != scenario.tau) throw std::invalid_argument("task: model window must equal scenario tau");
}

TaskSpec TaskSpec::preset(const std::string& task, bool toy_dims) {
    TaskSpec spec;
    spec.task = task;
    spec.scenario = sim::task_config(task);
    spec.model = toy_dims ? model::Mt3v2Config::toy() : model::Mt3v2Config::full_scale();
    spec.model.fov = spec.scenario.fov;
    spec.model.window = spec.scenario.tau;
    return spec;
}

}  // namespace mt3::harness
