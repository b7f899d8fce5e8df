"""Menu knowledge-base schema: predicates, argument kinds, vocabularies.

Every fact in a menu file must use one of the predicates below with the
declared arity.  Argument kinds drive validation in `duotalk.kb`:

* ``food``       - an atom declared by dish/1, combo/1, ingredient/1 or sauce/1
* ``dish``       - an atom declared by dish/1
* ``combo``      - an atom declared by combo/1
* ``topping``    - an atom declared by ingredient/1 or sauce/1
* ``group``      - an atom defined by combo_option_group/2
* ``member``     - an atom that is either a dish or a group
* ``category``   - one of CATEGORIES
* ``style``      - one of STYLES
* ``money``      - non-negative integer cents
* ``cal``        - non-negative integer calories
* ``dish_list``  - a list of dish atoms
"""

from __future__ import annotations

CATEGORIES = (
    "taco",
    "burrito",
    "quesadilla",
    "nacho",
    "bowl",
    "drink",
    "side",
    "dessert",
    "specialty",
    "freeze",
)

STYLES = ("fresco", "supreme", "grill")

SIZES = ("regular", "large")

# Operations a customer can apply to an ordered dish.
UPDATE_OPERATIONS = ("change", "add", "no", "less", "extra", "fresco", "supreme", "grill", "size")

# Operations that never change the price of a line.
FREE_OPERATIONS = ("no", "less")

FOOD_DECL_PREDS = ("dish/1", "combo/1", "ingredient/1", "sauce/1")

#: predicate key -> tuple of argument kinds
SCHEMA: dict[str, tuple[str, ...]] = {
    "dish/1": ("name",),
    "combo/1": ("name",),
    "ingredient/1": ("name",),
    "sauce/1": ("name",),
    "original_price/2": ("food", "money"),
    "original_cal/2": ("food", "cal"),
    "category/2": ("dish", "category"),
    "included_ingredient/2": ("dish", "topping"),
    "replaceable_ingredient/3": ("dish", "topping", "topping"),
    "replacement_price/4": ("dish", "topping", "topping", "money"),
    "available_topping/2": ("dish", "topping"),
    "popular_topping/2": ("dish", "topping"),
    "upgrade_price/3": ("dish", "topping", "money"),
    "upgrade_cal/3": ("dish", "topping", "cal"),
    "available_special_style/2": ("dish", "style"),
    "special_style_price/3": ("dish", "style", "money"),
    "extra_price/2": ("topping", "money"),
    "extra_cal/2": ("topping", "cal"),
    "combo_contain/2": ("combo", "member"),
    "combo_option_group/2": ("group", "dish_list"),
    "group_upgrade_price/3": ("group", "dish", "money"),
    "size_changable_drink/1": ("dish",),
    "upgrade_size_price/1": ("money",),
    "veggie/1": ("dish",),
    "cantina_chicken/1": ("dish",),
    "best_seller/1": ("dish",),
}

assert len(SCHEMA) == 26
