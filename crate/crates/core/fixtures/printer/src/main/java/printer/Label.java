package printer;

public class Label {
    public final String text;

    public Label(String text) {
        this.text = text;
    }
}
