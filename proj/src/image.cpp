#include "ffmct/image.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace ffmct {

void validate_image(const ImageGrid& img, const char* what) {
    FFMCT_CHECK_ARG(img.width > 0 && img.height > 0, what, ": empty image");
    FFMCT_CHECK_ARG(img.values.size() == static_cast<size_t>(img.width) * img.height, what,
                    ": buffer size does not match extents");
    for (float v : img.values) {
        FFMCT_CHECK_ARG(std::isfinite(v) && v >= 0.0f && v <= 1.0f, what,
                        ": pixel value outside [0,1]");
    }
}

void check_same_extents(const ImageGrid& a, const ImageGrid& b, const char* what) {
    FFMCT_CHECK_ARG(a.width == b.width && a.height == b.height, what, ": extent mismatch ",
                    a.width, "x", a.height, " vs ", b.width, "x", b.height);
}

ImageGrid mask_to_image(const BinaryMask& mask) {
    ImageGrid img(mask.width, mask.height);
    for (size_t i = 0; i < mask.bits.size(); ++i) img.values[i] = mask.bits[i] ? 1.0f : 0.0f;
    return img;
}

void write_image_raw(const std::filesystem::path& path, const ImageGrid& img,
                     const std::string& role, bool with_png_preview) {
    FFMCT_CHECK_ARG(img.width > 0 && img.height > 0, "write_image_raw: empty image");
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        FFMCT_CHECK_IO(out.good(), "cannot open for writing: ", path.string());
        out.write(reinterpret_cast<const char*>(img.values.data()),
                  static_cast<std::streamsize>(img.values.size() * sizeof(float)));
        FFMCT_CHECK_IO(out.good(), "short write: ", path.string());
    }
    {
        nlohmann::json side{{"width", img.width}, {"height", img.height}, {"role", role}};
        std::filesystem::path sp = path;
        sp += ".json";
        std::ofstream out(sp, std::ios::trunc);
        FFMCT_CHECK_IO(out.good(), "cannot open for writing: ", sp.string());
        out << side.dump() << "\n";
    }
    if (with_png_preview) {
        std::filesystem::path pp = path;
        pp += ".png";
        write_png_gray8(pp, img);
    }
}

ImageGrid read_image_raw(const std::filesystem::path& path) {
    std::filesystem::path sp = path;
    sp += ".json";
    std::ifstream side(sp);
    FFMCT_CHECK_IO(side.good(), "missing sidecar: ", sp.string());
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::io, "bad sidecar ", sp.string(), ": ", e.what());
    }
    ImageGrid img;
    img.width = meta.at("width").get<int>();
    img.height = meta.at("height").get<int>();
    FFMCT_CHECK_IO(img.width > 0 && img.height > 0, "bad extents in sidecar: ", sp.string());
    img.values.resize(static_cast<size_t>(img.width) * img.height);

    std::ifstream in(path, std::ios::binary);
    FFMCT_CHECK_IO(in.good(), "cannot open: ", path.string());
    in.read(reinterpret_cast<char*>(img.values.data()),
            static_cast<std::streamsize>(img.values.size() * sizeof(float)));
    FFMCT_CHECK_IO(in.gcount() == static_cast<std::streamsize>(img.values.size() * sizeof(float)),
                   "truncated image file: ", path.string());
    validate_image(img, "read_image_raw");
    return img;
}

Tensor image_to_tensor(const ImageGrid& img, bool requires_grad) {
    std::vector<double> data(img.values.begin(), img.values.end());
    return Tensor::from_data(Shape{1, 1, img.height, img.width}, std::move(data), requires_grad);
}

ImageGrid tensor_to_image(const Tensor& t, bool clip) {
    FFMCT_CHECK_ARG(t.defined(), "tensor_to_image: undefined tensor");
    const auto& s = t.shape();
    FFMCT_CHECK_ARG(s.size() == 4 && s[0] == 1 && s[1] == 1,
                    "tensor_to_image: expected [1,1,H,W], got ", shape_str(s));
    ImageGrid img(static_cast<int>(s[3]), static_cast<int>(s[2]));
    auto data = t.data();
    for (size_t i = 0; i < img.values.size(); ++i) {
        double v = data[i];
        if (clip) v = std::min(1.0, std::max(0.0, v));
        img.values[i] = static_cast<float>(v);
    }
    return img;
}

}  // namespace ffmct
