// Command-line front end: depth evaluation, loss computation, gradient
// verification, and the teacher-student demo.
//
// Exit codes: 0 success, 1 usage or config error, 2 data/format error,
// 3 verification failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rcdepth/config.hpp"
#include "rcdepth/depth_loss.hpp"
#include "rcdepth/distill.hpp"
#include "rcdepth/format.hpp"
#include "rcdepth/gradcheck.hpp"
#include "rcdepth/metrics.hpp"
#include "rcdepth/tensor_io.hpp"
#include "rcdepth/toy.hpp"

namespace {

using namespace rcdepth;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerification = 3;

void print_report_line(std::ostream& out, const EvalReport& r) {
    out << "cap=" << format_double(r.cap) << " n_valid=" << r.n_valid
        << " mae=" << format_double(r.mae) << " rmse=" << format_double(r.rmse)
        << " absrel=" << format_double(r.absrel)
        << " log10=" << format_double(r.log10)
        << " rmselog=" << format_double(r.rmselog)
        << " delta1=" << format_double(r.delta1)
        << " delta2=" << format_double(r.delta2)
        << " delta3=" << format_double(r.delta3) << "\n";
}

FeaturePyramid load_pyramid(const std::vector<std::string>& files,
                            FeaturePyramid::Role role) {
    if (files.size() != 5) {
        throw ConfigError("expected exactly 5 pyramid level files, got " +
                          std::to_string(files.size()));
    }
    FeaturePyramid pyr;
    pyr.role = role;
    for (std::size_t i = 0; i < 5; ++i) {
        pyr.levels[i] = read_tensor_file(files[i]);
    }
    return pyr;
}

InterDepthSet load_inter(const std::vector<std::string>& files) {
    if (files.size() != 3) {
        throw ConfigError("expected exactly 3 depth map files, got " +
                          std::to_string(files.size()));
    }
    InterDepthSet set;
    for (std::size_t i = 0; i < 3; ++i) {
        set.maps[i] = read_tensor_file(files[i]);
    }
    return set;
}

// out.rcdt -> out.<tag>.rcdt
std::string tagged_path(const std::string& base, const std::string& tag) {
    const auto dot = base.rfind('.');
    if (dot == std::string::npos) return base + "." + tag;
    return base.substr(0, dot) + "." + tag + base.substr(dot);
}

struct LossArgs {
    std::string kind;
    std::string pred, dense, sparse;
    std::vector<std::string> student, teacher;
    std::vector<std::string> student_cam, teacher_cam;
    std::vector<std::string> student_rad, teacher_rad;
    std::vector<std::string> student_dec, teacher_dec;
    std::vector<std::string> student_inter, teacher_inter;
    std::string grad_out;
    double beta = 1.0;
    bool detach_u = true;
    std::array<double, 4> gamma{1.0, 1.0, 1.0, 1.0};
};

int run_loss(const LossArgs& a) {
    LossResult res;
    if (a.kind == "urdl" || a.kind == "total") {
        if (a.pred.empty() || a.dense.empty() || a.sparse.empty()) {
            std::cerr << "loss: --pred, --dense and --sparse are required for kind="
                      << a.kind << "\n";
            return kExitUsage;
        }
    }
    if (a.kind == "urdl") {
        const Tensor pred = read_tensor_file(a.pred);
        const Tensor dense = read_tensor_file(a.dense);
        const Tensor sparse = read_tensor_file(a.sparse);
        res = urdl(pred, dense, sparse, a.beta, a.detach_u);
        if (!a.grad_out.empty()) write_tensor_file(a.grad_out, res.grads[0]);
    } else if (a.kind == "feat" || a.kind == "struct") {
        const FeaturePyramid s =
            load_pyramid(a.student, a.kind == "feat" ? FeaturePyramid::Role::camera
                                                     : FeaturePyramid::Role::decoder);
        const FeaturePyramid t =
            load_pyramid(a.teacher, s.role);
        res = a.kind == "feat" ? feature_l1_pyramid(s, t)
                               : structure_distill_loss(s, t);
        if (!a.grad_out.empty()) {
            for (std::size_t i = 0; i < 5; ++i) {
                write_tensor_file(
                    tagged_path(a.grad_out, "level" + std::to_string(i + 1)),
                    res.grads[i]);
            }
        }
    } else if (a.kind == "interdepth") {
        const InterDepthSet s = load_inter(a.student);
        const InterDepthSet t = load_inter(a.teacher);
        res = inter_depth_distill_loss(s, t, a.beta, a.detach_u);
        if (!a.grad_out.empty()) {
            for (std::size_t i = 0; i < 3; ++i) {
                write_tensor_file(
                    tagged_path(a.grad_out, "map" + std::to_string(i + 1)),
                    res.grads[i]);
            }
        }
    } else if (a.kind == "total") {
        const Tensor pred = read_tensor_file(a.pred);
        const Tensor dense = read_tensor_file(a.dense);
        const Tensor sparse = read_tensor_file(a.sparse);
        const LossResult depth = urdl(pred, dense, sparse, a.beta, a.detach_u);
        // Each weighted distillation term needs its inputs; a zero-weight
        // term may omit them and contributes exactly nothing.
        LossResult kd_i, kd_r, kd_dec, kd_d;
        auto require_inputs = [&](int j, bool have, const char* what) {
            if (a.gamma[j] != 0.0 && !have) {
                throw ConfigError(std::string("loss total: gamma") +
                                  std::to_string(j + 1) + " is nonzero but " +
                                  what + " inputs are missing");
            }
            return a.gamma[j] != 0.0;
        };
        if (require_inputs(0, !a.student_cam.empty(), "--student-cam/--teacher-cam")) {
            kd_i = feature_l1_pyramid(
                load_pyramid(a.student_cam, FeaturePyramid::Role::camera),
                load_pyramid(a.teacher_cam, FeaturePyramid::Role::camera));
        }
        if (require_inputs(1, !a.student_rad.empty(), "--student-rad/--teacher-rad")) {
            kd_r = feature_l1_pyramid(
                load_pyramid(a.student_rad, FeaturePyramid::Role::radar),
                load_pyramid(a.teacher_rad, FeaturePyramid::Role::radar));
        }
        if (require_inputs(2, !a.student_dec.empty(), "--student-dec/--teacher-dec")) {
            kd_dec = structure_distill_loss(
                load_pyramid(a.student_dec, FeaturePyramid::Role::decoder),
                load_pyramid(a.teacher_dec, FeaturePyramid::Role::decoder));
        }
        if (require_inputs(3, !a.student_inter.empty(),
                           "--student-inter/--teacher-inter")) {
            kd_d = inter_depth_distill_loss(load_inter(a.student_inter),
                                            load_inter(a.teacher_inter), a.beta,
                                            a.detach_u);
        }
        LossWeights w;
        w.gamma = a.gamma;
        res = total_loss(depth, kd_i, kd_r, kd_dec, kd_d, w);
        if (!a.grad_out.empty()) write_tensor_file(a.grad_out, res.grads[0]);
    } else {
        std::cerr << "loss: unknown kind '" << a.kind << "'\n";
        return kExitUsage;
    }
    std::cout << format_double(res.value) << "\n";
    return kExitOk;
}

int run_gradcheck(const std::string& op, std::uint64_t seed) {
    std::vector<std::string> ops;
    if (op == "all") {
        ops = registered_checks();
    } else {
        ops.push_back(op);
    }
    bool all_pass = true;
    std::printf("%-22s %8s %14s %14s %10s %10s %s\n", "op", "points",
                "max_rel_err", "max_abs_err", "eps", "tol", "result");
    std::vector<GradReport> reports;
    for (const std::string& name : ops) {
        const GradReport r = check(name, seed);
        all_pass = all_pass && r.pass;
        std::printf("%-22s %8zu %14.6e %14.6e %10.1e %10.1e %s\n",
                    r.op.c_str(), r.n_points, r.max_rel_error, r.max_abs_error,
                    r.eps, r.tolerance, r.pass ? "PASS" : "FAIL");
        reports.push_back(r);
    }
    for (const GradReport& r : reports) {
        std::cout << "record op=" << r.op << " n_points=" << r.n_points
                  << " max_rel_error=" << format_double(r.max_rel_error)
                  << " max_abs_error=" << format_double(r.max_abs_error)
                  << " eps=" << format_double(r.eps)
                  << " tolerance=" << format_double(r.tolerance)
                  << " pass=" << (r.pass ? 1 : 0) << "\n";
    }
    return all_pass ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radar-camera depth distillation toolkit"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    bool show_config = false;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--set", overrides, "config override, e.g. --set beta=2");
    app.add_flag("--print-config", show_config,
                 "echo the effective config and exit");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a depth prediction");
    std::string eval_pred, eval_gt;
    double eval_cap = 0.0;
    eval_cmd->add_option("pred", eval_pred, ".rcdt prediction")->required();
    eval_cmd->add_option("gt", eval_gt, ".rcdt ground truth")->required();
    auto* cap_opt = eval_cmd->add_option(
        "--cap", eval_cap, "evaluation distance cap in meters");

    auto* loss_cmd = app.add_subcommand("loss", "compute a loss value");
    LossArgs loss_args;
    loss_cmd
        ->add_option("--kind", loss_args.kind,
                     "one of urdl, feat, struct, interdepth, total")
        ->required()
        ->check(CLI::IsMember({"urdl", "feat", "struct", "interdepth", "total"}));
    loss_cmd->add_option("--pred", loss_args.pred, "predicted depth .rcdt");
    loss_cmd->add_option("--dense", loss_args.dense, "dense supervision .rcdt");
    loss_cmd->add_option("--sparse", loss_args.sparse, "sparse supervision .rcdt");
    loss_cmd->add_option("--student", loss_args.student,
                         "student tensors (5 pyramid levels or 3 depth maps)");
    loss_cmd->add_option("--teacher", loss_args.teacher, "teacher tensors");
    loss_cmd->add_option("--student-cam", loss_args.student_cam,
                         "total: student camera pyramid (5 files)");
    loss_cmd->add_option("--teacher-cam", loss_args.teacher_cam,
                         "total: teacher camera pyramid (5 files)");
    loss_cmd->add_option("--student-rad", loss_args.student_rad,
                         "total: student radar pyramid (5 files)");
    loss_cmd->add_option("--teacher-rad", loss_args.teacher_rad,
                         "total: teacher radar pyramid (5 files)");
    loss_cmd->add_option("--student-dec", loss_args.student_dec,
                         "total: student decoder pyramid (5 files)");
    loss_cmd->add_option("--teacher-dec", loss_args.teacher_dec,
                         "total: teacher decoder pyramid (5 files)");
    loss_cmd->add_option("--student-inter", loss_args.student_inter,
                         "total: student depth maps (3 files)");
    loss_cmd->add_option("--teacher-inter", loss_args.teacher_inter,
                         "total: teacher depth maps (3 files)");
    loss_cmd->add_option("--grad", loss_args.grad_out,
                         "write gradient tensor(s) to this .rcdt path");
    auto* loss_beta = loss_cmd->add_option("--beta", loss_args.beta);
    auto* loss_detach =
        loss_cmd->add_option("--detach-u", loss_args.detach_u,
                             "treat uncertainty weights as constants");
    auto* g1 = loss_cmd->add_option("--gamma1", loss_args.gamma[0]);
    auto* g2 = loss_cmd->add_option("--gamma2", loss_args.gamma[1]);
    auto* g3 = loss_cmd->add_option("--gamma3", loss_args.gamma[2]);
    auto* g4 = loss_cmd->add_option("--gamma4", loss_args.gamma[3]);

    auto* grad_cmd = app.add_subcommand("gradcheck", "verify analytic gradients");
    std::string grad_op = "all";
    std::uint64_t grad_seed = 0;
    {
        std::vector<std::string> ops = registered_checks();
        ops.insert(ops.begin(), "all");
        grad_cmd->add_option("--op", grad_op, "check to run")
            ->check(CLI::IsMember(ops));
    }
    grad_cmd->add_option("--seed", grad_seed, "sampling seed");

    auto* demo_cmd = app.add_subcommand("demo", "teacher-student training demo");
    std::string demo_kd = "on";
    std::string demo_kd_mask;
    std::string demo_out = "history.txt";
    std::uint64_t demo_seed = 0;
    std::size_t demo_steps = 0, demo_res = 0;
    double demo_lr = 0.0;
    demo_cmd->add_option("--kd", demo_kd, "all distillation losses on or off")
        ->check(CLI::IsMember({"on", "off"}));
    demo_cmd->add_option("--kd-mask", demo_kd_mask,
                         "per-loss toggles, e.g. 1,0,1,1 "
                         "(image,radar,decoder,depth); overrides --kd");
    demo_cmd->add_option("--out", demo_out, "history file path");
    auto* demo_seed_opt = demo_cmd->add_option("--seed", demo_seed);
    auto* demo_steps_opt = demo_cmd->add_option("--steps", demo_steps);
    auto* demo_res_opt =
        demo_cmd->add_option("--resolution", demo_res, "scene edge, multiple of 32");
    auto* demo_lr_opt = demo_cmd->add_option("--lr", demo_lr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        Config config;
        if (!config_path.empty()) config = load_config_file(config_path);
        for (const std::string& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("--set expects key=value, got '" + kv + "'");
            }
            apply_config_entry(config, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (show_config) {
            print_config(std::cout, config);
            return kExitOk;
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return kExitUsage;
        }

        if (eval_cmd->parsed()) {
            const Tensor pred = read_tensor_file(eval_pred);
            const Tensor gt = read_tensor_file(eval_gt);
            std::vector<double> caps =
                cap_opt->count() > 0 ? std::vector<double>{eval_cap} : config.caps;
            for (double cap : caps) {
                print_report_line(std::cout, evaluate(pred, gt, cap));
            }
            return kExitOk;
        }

        if (loss_cmd->parsed()) {
            if (loss_beta->count() == 0) loss_args.beta = config.beta;
            if (loss_detach->count() == 0) loss_args.detach_u = config.detach_u;
            if (g1->count() == 0) loss_args.gamma[0] = config.gamma[0];
            if (g2->count() == 0) loss_args.gamma[1] = config.gamma[1];
            if (g3->count() == 0) loss_args.gamma[2] = config.gamma[2];
            if (g4->count() == 0) loss_args.gamma[3] = config.gamma[3];
            return run_loss(loss_args);
        }

        if (grad_cmd->parsed()) {
            return run_gradcheck(grad_op, grad_seed);
        }

        if (demo_cmd->parsed()) {
            TrainConfig tc;
            tc.beta = config.beta;
            tc.gamma.gamma = config.gamma;
            tc.detach_u = config.detach_u;
            tc.height = tc.width = config.demo_resolution;
            tc.steps = config.demo_steps;
            tc.lr = config.demo_lr;
            tc.seed = config.demo_seed;
            tc.train_scenes = config.demo_train_scenes;
            tc.eval_scenes = config.demo_eval_scenes;
            tc.eval_every = config.demo_eval_every;
            if (demo_seed_opt->count() > 0) tc.seed = demo_seed;
            if (demo_steps_opt->count() > 0) tc.steps = demo_steps;
            if (demo_res_opt->count() > 0) tc.height = tc.width = demo_res;
            if (demo_lr_opt->count() > 0) tc.lr = demo_lr;
            if (demo_kd == "off") tc.kd_enabled = {false, false, false, false};
            if (!demo_kd_mask.empty()) {
                if (demo_kd_mask.size() != 7 ||
                    demo_kd_mask[1] != ',' || demo_kd_mask[3] != ',' ||
                    demo_kd_mask[5] != ',') {
                    throw ConfigError(
                        "--kd-mask expects four comma-separated 0/1 entries");
                }
                std::array<bool, 4> mask{};
                for (int j = 0; j < 4; ++j) {
                    const char c = demo_kd_mask[2 * j];
                    if (c != '0' && c != '1') {
                        throw ConfigError(
                            "--kd-mask expects four comma-separated 0/1 entries");
                    }
                    mask[j] = c == '1';
                }
                tc.kd_enabled = mask;
            }

            const TrainingHistory history = train(tc);
            std::ofstream out(demo_out, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot open history file: " + demo_out);
            write_history(out, history);
            std::cout << "params student=" << history.student_params
                      << " teacher=" << history.teacher_params << "\n";
            const EvalRecord& final_eval = history.evals.back();
            std::cout << "final ";
            print_report_line(std::cout, final_eval.report);
            return kExitOk;
        }

        std::cerr << app.help();
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
