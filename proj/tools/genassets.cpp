// Regenerates the bundled synthetic test images under assets/images/.
// Deterministic: the same binary always reproduces the same files.

#include <cstdio>
#include <filesystem>
#include <string>

#include "osr/image_io.hpp"
#include "osr/synth.hpp"

int main(int argc, char** argv) {
    const std::string out_dir = argc > 1 ? argv[1] : "assets/images";
    std::filesystem::create_directories(out_dir);

    struct Spec {
        const char* name;
        uint64_t seed;
        double detail;
    };
    // train: the pair used by the bundled configs; im1..im5: held-out set
    const Spec specs[] = {
        {"train", 20240601, 1.65}, {"im1", 11, 1.45}, {"im2", 22, 1.35},
        {"im3", 33, 1.55},         {"im4", 44, 1.40}, {"im5", 55, 1.50},
    };
    for (const Spec& s : specs) {
        const osr::PlanarImage img = osr::synth_texture_image(s.seed, 128, 128, s.detail);
        const std::string path = out_dir + "/" + s.name + ".png";
        osr::save_image(img, path);
        std::printf("wrote %s\n", path.c_str());
    }
    return 0;
}
