"""Prompt text for dataset records.

Ten fixed line-art templates with ``{count}`` and ``{animal}`` slots, plus
the static instruction template used to author naturalistic counting prompts
(shipped as a string resource only; no LLM calls happen here).
"""

from __future__ import annotations

TEMPLATES: tuple[str, ...] = (
    "A minimalist black line drawing of {count} {animal}, set against a soft "
    "gray background, each outlined with smooth, precise lines to create an "
    "elegant and harmonious composition.",
    "A sleek and simple black line art depiction of {count} {animal}, all "
    "drawn with clean, straight lines against a soft gray background, "
    "highlighting their graceful yet minimalist form.",
    "An artistic, minimalist rendering of {count} {animal} in black line "
    "art, featuring sharp, clean outlines and a neutral gray backdrop, "
    "providing a balanced and sophisticated aesthetic.",
    "A charming collection of {count} {animal}, each drawn with minimalist "
    "black lines, creating a graceful and balanced visual impression on a "
    "soft gray canvas.",
    "A simple yet elegant black line drawing of {count} {animal}, captured "
    "in clear, refined lines on a gray background, emphasizing their sleek "
    "shapes and natural beauty.",
    "An understated illustration of {count} {animal} in black line art, "
    "gracefully outlined against a soft gray backdrop. The simplicity of "
    "the design brings out the elegant beauty of each {animal}.",
    "A refined, minimalist black line art of {count} {animal}, with each "
    "figure outlined with clean precision against a subtle gray background, "
    "creating a serene and balanced visual composition.",
    "A modern take on black line art, featuring {count} {animal} drawn with "
    "smooth and clear lines, set against a soft gray backdrop, exuding "
    "simplicity and elegance.",
    "A clean, minimalist design of {count} {animal} in black line art, "
    "placed against a soft gray background, with each {animal} portrayed in "
    "a calm and graceful manner.",
    "An elegant black line illustration of {count} {animal}, outlined in "
    "precise, simple lines, against a smooth gray background, capturing "
    "their minimalist charm and beauty.",
)

# Static resource: the instruction text used to author naturalistic counting
# prompts with an external assistant.  Never executed by this package.
NATURALISTIC_PROMPT_TEMPLATE = (
    "Please generate [number] counting prompts for text-to-image models with "
    "the following classes: [${class_names}]. Each prompt should contain a "
    "number between 2 and 6 and follow this format: \n"
    "index.prompt|number of objects|object name\n"
    "\n"
    "For example:\n"
    "\n"
    "1.Three dogs are playing with each other|3|dog\n"
    "\n"
    "2.An image of four cars driving down the street.|4|car\n"
    "\n"
    "Ensure diversity by varying sentence structures, actions, and "
    "environments. Use different verbs, adjectives, and locations to make "
    "each prompt unique. The prompts should be reasonable. Return exactly "
    "ten prompts, starting from index 1, and separate them by '\\n'."
)

_UNITS = (
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
)
_TENS = ("", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety")


def count_to_words(count: int) -> str:
    """English words for 0..99 (enough for the supported count ranges)."""
    if not 0 <= count <= 99:
        raise ValueError(f"count {count} out of word-rendering range 0..99")
    if count < 20:
        return _UNITS[count]
    tens, unit = divmod(count, 10)
    return _TENS[tens] if unit == 0 else f"{_TENS[tens]}-{_UNITS[unit]}"


def render_prompt(template_id: int, count: int, category: str, count_style: str = "numeral") -> str:
    """Fill the {count} and {animal} slots of one of the fixed templates.

    The count renders as a decimal numeral by default; ``count_style="word"``
    spells it out instead.
    """
    if not 0 <= template_id < len(TEMPLATES):
        raise ValueError(f"template_id must be in 0..{len(TEMPLATES) - 1}, got {template_id}")
    if count_style == "numeral":
        count_text = str(count)
    elif count_style == "word":
        count_text = count_to_words(count)
    else:
        raise ValueError(f"count_style must be 'numeral' or 'word', got {count_style!r}")
    return TEMPLATES[template_id].format(count=count_text, animal=category)
