#include "tomsim/names.hpp"

#include "tomsim/errors.hpp"

namespace tomsim {

const std::vector<std::string>& animate_name_pool() {
    static const std::vector<std::string> pool = {
        "Alice",    "Bob",      "Charlie", "Danny",    "Edward",  "Frank",
        "Georgia",  "Harvey",   "Ian",     "Jake",     "Kevin",   "Liam",
        "Mike",     "Nora",     "Oscar",   "Peter",    "Quinn",   "Rachel",
        "Sally",    "Thomas",   "Ulric",   "Victor",   "Wendy",   "Xavier",
        "Yvonne",   "Zach",     "Anne",    "Brian",    "Clara",   "David",
        "Emma",     "Fiona",    "George",  "Hannah",   "Isaac",   "Julia",
        "Kyle",     "Laura",    "Martin",  "Nina",     "Owen",    "Paula",
        "Quentin",  "Rosa",     "Simon",   "Tina",     "Uma",     "Vera",
        "Walter",   "Xenia",    "Yusuf",   "Zoe",      "Aaron",   "Bella",
        "Caleb",    "Diana",    "Elliot",  "Faith",    "Gavin",   "Heidi",
        "Ivan",     "Jasmine",  "Keith",   "Lydia",    "Mason",   "Naomi",
        "Oliver",   "Penny",    "Ralph",   "Sofia",    "Trevor",  "Ursula",
        "Vince",    "Willa",    "Yolanda", "Zane",     "Amber",   "Blake",
        "Carmen",   "Derek",    "Elena",   "Felix",    "Gloria",  "Hugo",
        "Irene",    "Jonas",    "Karen",   "Leo",      "Miriam",  "Nathan",
        "Olga",     "Pablo",    "Rita",    "Stella",   "Tobias",  "Valerie",
        "Wesley",   "Abigail",  "Bernard", "Cassandra","Dominic", "Eleanor",
        "Fernando", "Gretchen", "Harold",  "Ingrid",   "Jerome",  "Katrina",
        "Lionel",   "Melissa",  "Nolan",   "Ophelia",  "Preston", "Regina",
        "Sebastian","Tabitha",  "Ulysses", "Veronica", "Wallace", "Ximena",
        "Yannick",  "Zelda",    "Arthur",  "Beatrice", "Conrad",  "Daphne",
        "Ernest",   "Florence", "Gilbert", "Harriet",  "Irving",  "Josephine",
        "Kenneth",  "Lorraine", "Maurice", "Nadine",   "Orville", "Priscilla",
        "Randolph", "Sylvia",   "Terrence","Ulrika",   "Vernon",  "Winifred",
        "Alejandro","Bianca",   "Cedric",  "Delilah",  "Emmett",  "Francesca",
        "Gideon",   "Helena",   "Ignatius","Jocelyn",  "Kendrick","Lucinda",
        "Malcolm",  "Natasha",  "Octavio", "Penelope", "Quincy",  "Rosalind",
        "Stanley",  "Theodora", "Umberto", "Vivienne", "Wilfred", "Xiomara",
        "Yosef",    "Zachariah","Adrian",  "Brenda",   "Curtis",  "Denise",
        "Edgar",    "Felicity", "Graham",  "Hilda",    "Ismael",  "Janet",
        "Kurt",     "Lorenzo",  "Marsha",  "Norbert",  "Otis",    "Patrice",
        "Ramona",   "Sheldon",  "Tamara",  "Urban",    "Violet",  "Wade",
        "Yara",     "Zeke",     "Alfred",  "Bridget",  "Clifford","Dora",
        "Eugene",   "Freda",    "Gordon",  "Hazel",    "Ivor",    "Joan",
        "Lambert",  "Mabel",    "Niles",   "Opal",     "Percy",   "Ruth",
        "Seth",     "Thelma",   "Vance",   "Wilma",    "York",    "Zora",
        "Austin",   "Bonnie",   "Clark",   "Doris",    "Elmer",   "Flora",
    };
    return pool;
}

const std::vector<std::string>& inanimate_name_pool() {
    static const std::vector<std::string> pool = {
        "ball",      "book",      "lamp",     "vase",      "clock",    "mirror",
        "pillow",    "blanket",   "candle",   "basket",    "hammer",   "wrench",
        "ladder",    "bucket",    "broom",    "kettle",    "teapot",   "mug",
        "plate",     "bowl",      "spoon",    "fork",      "scarf",    "hat",
        "glove",     "umbrella",  "suitcase", "backpack",  "wallet",   "notebook",
        "pencil",    "eraser",    "stapler",  "folder",    "envelope", "stamp",
        "marble",    "puzzle",    "trophy",   "medal",     "whistle",  "compass",
        "telescope", "microscope","globe",    "atlas",     "radio",    "camera",
        "lantern",   "cushion",   "tray",     "jug",       "crate",    "barrel",
        "rope",      "chain",     "magnet",   "prism",     "easel",    "canvas",
        "violin",    "drum",      "flute",    "banjo",
    };
    return pool;
}

std::vector<std::string> sample_names(const std::vector<std::string>& pool,
                                      std::size_t count, SplitMix64& rng) {
    if (count > pool.size()) {
        throw InvalidParams("requested " + std::to_string(count) +
                            " names but the pool holds " + std::to_string(pool.size()));
    }
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t idx : rng.sample_indices(pool.size(), count)) {
        out.push_back(pool[idx]);
    }
    return out;
}

}  // namespace tomsim
